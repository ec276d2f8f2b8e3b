#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

#include "evidentia/bn.hpp"
#include "evidentia/factor.hpp"

namespace evidentia {

// Evidence below this mass is treated as impossible.
inline constexpr double kImpossibleEvidenceMass = 1e-12;

struct PosteriorReport {
  std::map<NodeId, std::vector<double>> marginals;
  double evidence_probability = 1.0;
};

// Clique tree compiled from a network. Immutable after construction; each
// query allocates its own working potentials, so one tree can serve
// concurrent queries.
class CliqueTree {
 public:
  explicit CliqueTree(const DiscreteBayesNet& net) : net_(std::make_shared<const DiscreteBayesNet>(net)) {
    require_valid(*net_);
    variables_.assign(net_->dag().nodes().begin(), net_->dag().nodes().end());
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      index_[variables_[i]] = i;
      card_.push_back(net_->cardinality(variables_[i]));
    }
    triangulate();
    connect();
    assign_potentials();
  }

  const std::vector<NodeId>& variables() const { return variables_; }
  std::size_t clique_count() const { return cliques_.size(); }

  std::vector<NodeSet> cliques() const {
    std::vector<NodeSet> out;
    for (const auto& c : cliques_) out.push_back(names(c));
    return out;
  }

  // Tree edges as clique index pairs with their separators.
  std::vector<std::tuple<std::size_t, std::size_t, NodeSet>> separators() const {
    std::vector<std::tuple<std::size_t, std::size_t, NodeSet>> out;
    for (std::size_t c = 0; c < cliques_.size(); ++c)
      if (parent_[c] != kNone) out.emplace_back(parent_[c], c, names(separator_[c]));
    return out;
  }

  PosteriorReport posterior(const EvidenceSet& ev) const {
    Propagation run = propagate(ev);
    PosteriorReport report;
    report.evidence_probability = run.evidence_probability;
    for (std::size_t v = 0; v < variables_.size(); ++v) {
      Factor m = marginal(run.beliefs[home_[v]], {v});
      double s = m.sum();
      for (double& x : m.values) x /= s;
      report.marginals[variables_[v]] = std::move(m.values);
    }
    return report;
  }

  double probability_of_evidence(const EvidenceSet& ev) const { return propagate(ev).evidence_probability; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Propagation {
    std::vector<Factor> beliefs;
    double evidence_probability;
  };

  NodeSet names(const std::vector<std::size_t>& vars) const {
    NodeSet out;
    for (auto v : vars) out.insert(variables_[v]);
    return out;
  }

  // Min-fill elimination on the moral graph, ties to the smallest id.
  void triangulate() {
    const std::size_t n = variables_.size();
    std::vector<std::set<std::size_t>> adj(n);
    UGraph moral = moralize(net_->dag());
    for (const auto& [a, b] : moral.arcs()) {
      adj[index_[a]].insert(index_[b]);
      adj[index_[b]].insert(index_[a]);
    }
    std::vector<bool> eliminated(n, false);
    std::vector<std::vector<std::size_t>> candidates;
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t best = kNone, best_fill = 0;
      for (std::size_t v = 0; v < n; ++v) {
        if (eliminated[v]) continue;
        std::size_t fill = 0;
        for (auto i = adj[v].begin(); i != adj[v].end(); ++i)
          for (auto j = std::next(i); j != adj[v].end(); ++j)
            if (!adj[*i].count(*j)) ++fill;
        if (best == kNone || fill < best_fill) {
          best = v;
          best_fill = fill;
        }
      }
      std::vector<std::size_t> clique(adj[best].begin(), adj[best].end());
      clique.push_back(best);
      std::sort(clique.begin(), clique.end());
      for (auto i = adj[best].begin(); i != adj[best].end(); ++i)
        for (auto j = std::next(i); j != adj[best].end(); ++j) {
          adj[*i].insert(*j);
          adj[*j].insert(*i);
        }
      for (auto u : adj[best]) adj[u].erase(best);
      adj[best].clear();
      eliminated[best] = true;
      candidates.push_back(std::move(clique));
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      bool subsumed = false;
      for (std::size_t j = 0; j < candidates.size() && !subsumed; ++j) {
        if (i == j) continue;
        const auto& a = candidates[i];
        const auto& b = candidates[j];
        bool subset = std::includes(b.begin(), b.end(), a.begin(), a.end());
        // Equal cliques: keep the first occurrence only.
        if (subset && (a.size() < b.size() || j < i)) subsumed = true;
      }
      if (!subsumed) cliques_.push_back(candidates[i]);
    }
  }

  static std::vector<std::size_t> intersect(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  }

  // Maximum-weight spanning tree on separator sizes (Kruskal), rooted at 0.
  void connect() {
    const std::size_t k = cliques_.size();
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> candidates;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) candidates.emplace_back(intersect(cliques_[i], cliques_[j]).size(), i, j);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });
    std::vector<std::size_t> root(k);
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](std::size_t x) {
      while (root[x] != x) x = root[x] = root[root[x]];
      return x;
    };
    std::vector<std::vector<std::size_t>> adj(k);
    for (const auto& [w, i, j] : candidates) {
      std::size_t ri = find(i), rj = find(j);
      if (ri == rj) continue;
      root[ri] = rj;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
    parent_.assign(k, kNone);
    separator_.assign(k, {});
    children_.assign(k, {});
    std::vector<bool> seen(k, false);
    order_.clear();
    if (k == 0) return;
    order_.push_back(0);
    seen[0] = true;
    for (std::size_t head = 0; head < order_.size(); ++head) {
      std::size_t c = order_[head];
      std::sort(adj[c].begin(), adj[c].end());
      for (auto d : adj[c]) {
        if (seen[d]) continue;
        seen[d] = true;
        parent_[d] = c;
        separator_[d] = intersect(cliques_[c], cliques_[d]);
        children_[c].push_back(d);
        order_.push_back(d);
      }
    }
  }

  Factor clique_factor(std::size_t c) const {
    std::vector<std::size_t> card;
    for (auto v : cliques_[c]) card.push_back(card_[v]);
    return Factor::unit(cliques_[c], std::move(card));
  }

  Factor cpt_factor(const NodeId& node) const {
    const Cpt& cpt = net_->cpt(node);
    std::vector<std::size_t> family{index_.at(node)};
    for (const auto& p : cpt.parents) family.push_back(index_.at(p));
    std::sort(family.begin(), family.end());
    std::vector<std::size_t> card;
    for (auto v : family) card.push_back(card_[v]);
    Factor f = Factor::unit(family, card);

    std::vector<std::size_t> parent_pos;
    for (const auto& p : cpt.parents)
      parent_pos.push_back(std::find(family.begin(), family.end(), index_.at(p)) - family.begin());
    std::size_t self_pos = std::find(family.begin(), family.end(), index_.at(node)) - family.begin();

    std::vector<std::size_t> counter(family.size(), 0);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
      std::size_t row = 0;
      for (auto pp : parent_pos) row = row * card[pp] + counter[pp];
      f.values[k] = cpt.rows[row][counter[self_pos]];
      for (std::size_t i = family.size(); i-- > 0;) {
        if (++counter[i] < card[i]) break;
        counter[i] = 0;
      }
    }
    return f;
  }

  std::size_t containing_clique(const std::vector<std::size_t>& vars) const {
    std::size_t best = kNone;
    for (std::size_t c = 0; c < cliques_.size(); ++c) {
      if (!std::includes(cliques_[c].begin(), cliques_[c].end(), vars.begin(), vars.end())) continue;
      if (best == kNone || cliques_[c].size() < cliques_[best].size()) best = c;
    }
    return best;
  }

  void assign_potentials() {
    potentials_.clear();
    for (std::size_t c = 0; c < cliques_.size(); ++c) potentials_.push_back(clique_factor(c));
    for (const auto& v : variables_) {
      Factor f = cpt_factor(v);
      std::size_t c = containing_clique(f.vars);
      multiply_in(potentials_[c], f);
    }
    home_.clear();
    for (std::size_t v = 0; v < variables_.size(); ++v) home_.push_back(containing_clique({v}));
  }

  Factor evidence_factor(std::size_t v, const std::vector<double>& weights) const {
    Factor f = Factor::unit({v}, {card_[v]});
    f.values = weights;
    return f;
  }

  Propagation propagate(const EvidenceSet& ev) const {
    check_evidence(*net_, ev);
    std::vector<Factor> pot = potentials_;
    for (const auto& [node, state] : ev.hard) {
      std::size_t v = index_.at(node);
      std::vector<double> indicator(card_[v], 0.0);
      indicator[net_->space(node).require_index(state)] = 1.0;
      multiply_in(pot[home_[v]], evidence_factor(v, indicator));
    }
    for (const auto& [node, weights] : ev.soft) {
      std::size_t v = index_.at(node);
      multiply_in(pot[home_[v]], evidence_factor(v, weights));
    }

    const std::size_t k = cliques_.size();
    std::vector<Factor> up(k), down(k);
    double log_mass = 0.0;
    bool impossible = false;

    // Collect towards the root; each message is normalized and its scale kept
    // in log form.
    for (std::size_t i = order_.size(); i-- > 1;) {
      std::size_t c = order_[i];
      Factor belief = pot[c];
      for (auto d : children_[c]) multiply_in(belief, up[d]);
      up[c] = marginal(belief, separator_[c]);
      double s = up[c].sum();
      if (!(s > 0.0)) {
        impossible = true;
        break;
      }
      log_mass += std::log(s);
      up[c].scale(1.0 / s);
    }
    double mass = 0.0;
    if (!impossible) {
      Factor root_belief = pot[0];
      for (auto d : children_[0]) multiply_in(root_belief, up[d]);
      double s = root_belief.sum();
      if (s > 0.0) mass = std::exp(log_mass + std::log(s));
    }
    if (ev.empty()) mass = 1.0;
    if (impossible || mass < kImpossibleEvidenceMass)
      throw ImpossibleEvidence("evidence has probability below " + std::to_string(kImpossibleEvidenceMass));

    // Distribute from the root.
    for (std::size_t i = 1; i < order_.size(); ++i) {
      std::size_t c = order_[i];
      std::size_t p = parent_[c];
      Factor sender = pot[p];
      if (parent_[p] != kNone) multiply_in(sender, down[p]);
      for (auto sib : children_[p])
        if (sib != c) multiply_in(sender, up[sib]);
      down[c] = marginal(sender, separator_[c]);
      double s = down[c].sum();
      if (s > 0.0) down[c].scale(1.0 / s);
    }

    Propagation out{std::vector<Factor>(k), mass};
    for (std::size_t c = 0; c < k; ++c) {
      Factor belief = pot[c];
      for (auto d : children_[c]) multiply_in(belief, up[d]);
      if (parent_[c] != kNone) multiply_in(belief, down[c]);
      out.beliefs[c] = std::move(belief);
    }
    return out;
  }

  std::shared_ptr<const DiscreteBayesNet> net_;
  std::vector<NodeId> variables_;
  std::map<NodeId, std::size_t> index_;
  std::vector<std::size_t> card_;
  std::vector<std::vector<std::size_t>> cliques_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::size_t>> separator_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> order_;
  std::vector<Factor> potentials_;
  std::vector<std::size_t> home_;
};

inline CliqueTree build_junction_tree(const DiscreteBayesNet& net) { return CliqueTree(net); }

inline PosteriorReport posterior_marginals(const DiscreteBayesNet& net, const EvidenceSet& ev) {
  return CliqueTree(net).posterior(ev);
}

inline double probability_of_evidence(const DiscreteBayesNet& net, const EvidenceSet& ev) {
  return CliqueTree(net).probability_of_evidence(ev);
}

}  // namespace evidentia
