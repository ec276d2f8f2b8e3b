#pragma once

// Independent reference implementations used as test oracles. None of them
// share code with the engines beyond the plain data types.

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "evidentia/bn.hpp"
#include "evidentia/ceg.hpp"
#include "evidentia/wigmore.hpp"

namespace oracle {

using namespace evidentia;

// d-separation by trail enumeration: A and B are separated by C iff no simple
// trail between them is active. A trail is active when every collider on it
// has itself or a descendant in C and every other interior node is outside C.
inline bool d_separated(const Dag& g, const NodeSet& a, const NodeSet& b, const NodeSet& c) {
  auto descendant_in_c = [&](const NodeId& m) {
    if (c.count(m)) return true;
    for (const auto& d : g.descendants(m))
      if (c.count(d)) return true;
    return false;
  };
  std::vector<NodeId> trail;
  std::set<NodeId> on_trail;
  std::function<bool(const NodeId&)> extend = [&](const NodeId& v) -> bool {
    if (b.count(v) && trail.size() > 1) return true;
    std::set<NodeId> neighbours(g.parents(v).begin(), g.parents(v).end());
    neighbours.insert(g.children(v).begin(), g.children(v).end());
    for (const auto& w : neighbours) {
      if (on_trail.count(w)) continue;
      // v becomes interior once w is appended; check v's status.
      if (trail.size() >= 2) {
        const NodeId& u = trail[trail.size() - 2];
        bool collider = g.has_edge(u, v) && g.has_edge(w, v);
        if (collider ? !descendant_in_c(v) : c.count(v) > 0) continue;
      }
      trail.push_back(w);
      on_trail.insert(w);
      bool active = extend(w);
      trail.pop_back();
      on_trail.erase(w);
      if (active) return true;
    }
    return false;
  };
  for (const auto& x : a) {
    trail = {x};
    on_trail = {x};
    if (extend(x)) return false;
  }
  return true;
}

// Joint probability of a full assignment straight from the tables.
inline double joint(const DiscreteBayesNet& net, const std::map<NodeId, std::size_t>& x) {
  double p = 1.0;
  for (const auto& [v, cpt] : net.cpts()) {
    std::size_t row = 0;
    for (const auto& parent : cpt.parents) row = row * net.cardinality(parent) + x.at(parent);
    p *= cpt.rows[row][x.at(v)];
  }
  return p;
}

// Calls f(assignment) for every joint configuration.
inline void for_each_assignment(const DiscreteBayesNet& net,
                                const std::function<void(const std::map<NodeId, std::size_t>&)>& f) {
  std::vector<NodeId> vars(net.dag().nodes().begin(), net.dag().nodes().end());
  std::map<NodeId, std::size_t> x;
  for (const auto& v : vars) x[v] = 0;
  while (true) {
    f(x);
    std::size_t i = 0;
    for (; i < vars.size(); ++i) {
      if (++x[vars[i]] < net.cardinality(vars[i])) break;
      x[vars[i]] = 0;
    }
    if (i == vars.size()) return;
  }
}

struct Posterior {
  std::map<NodeId, std::vector<double>> marginals;
  double evidence_probability = 0.0;
};

// Brute-force posterior: weight each configuration by its evidence
// likelihood, then normalize.
inline Posterior posterior(const DiscreteBayesNet& net, const EvidenceSet& ev) {
  Posterior out;
  for (const auto& v : net.dag().nodes()) out.marginals[v].assign(net.cardinality(v), 0.0);
  for_each_assignment(net, [&](const std::map<NodeId, std::size_t>& x) {
    double w = joint(net, x);
    for (const auto& [v, state] : ev.hard)
      if (net.space(v).states[x.at(v)] != state) w = 0.0;
    for (const auto& [v, weights] : ev.soft) w *= weights[x.at(v)];
    out.evidence_probability += w;
    for (const auto& [v, s] : x) out.marginals[v][s] += w;
  });
  if (out.evidence_probability > 0)
    for (auto& [_, m] : out.marginals)
      for (auto& p : m) p /= out.evidence_probability;
  return out;
}

// Does `v` reach `target` along chart edges? Forward search from each node.
inline bool chart_reaches(const WigmoreChart& chart, const NodeId& v, const NodeId& target) {
  std::set<NodeId> seen;
  std::function<bool(const NodeId&)> dfs = [&](const NodeId& u) {
    if (!seen.insert(u).second) return false;
    for (const auto* e : chart.outgoing(u))
      if (e->to == target || dfs(e->to)) return true;
    return false;
  };
  return dfs(v);
}

inline NodeSet relevant(const WigmoreChart& chart) {
  NodeSet out;
  for (const auto& [id, _] : chart.nodes())
    if (id != chart.probandum() && chart_reaches(chart, id, chart.probandum())) out.insert(id);
  return out;
}

// Root-to-leaf label sequences and probabilities of a staged tree, computed
// from the stage vectors directly.
inline std::multiset<std::pair<std::vector<std::string>, double>> tree_paths(const StagedTree& st) {
  std::multiset<std::pair<std::vector<std::string>, double>> out;
  std::vector<std::string> labels;
  std::function<void(const NodeId&, double)> walk = [&](const NodeId& v, double p) {
    bool leaf = true;
    for (const auto& e : st.tree().edges()) {
      if (e.tail != v) continue;
      leaf = false;
      const std::string& sid = st.stage_of(v);
      const std::string& slot = st.stage(sid).members.at(v).at(e.label);
      labels.push_back(slot);
      walk(e.head, p * st.probabilities().at(sid).at(slot));
      labels.pop_back();
    }
    if (leaf) out.insert({labels, p});
  };
  walk(st.tree().root(), 1.0);
  return out;
}

// Running intersection: the cliques holding any one variable form a connected
// subtree of the clique tree.
inline bool running_intersection(const std::vector<NodeSet>& cliques,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& links) {
  std::set<NodeId> vars;
  for (const auto& c : cliques) vars.insert(c.begin(), c.end());
  for (const auto& v : vars) {
    std::set<std::size_t> holding;
    for (std::size_t i = 0; i < cliques.size(); ++i)
      if (cliques[i].count(v)) holding.insert(i);
    std::set<std::size_t> seen{*holding.begin()};
    std::vector<std::size_t> stack{*holding.begin()};
    while (!stack.empty()) {
      auto i = stack.back();
      stack.pop_back();
      for (const auto& [x, y] : links) {
        std::size_t other = x == i ? y : (y == i ? x : static_cast<std::size_t>(-1));
        if (other != static_cast<std::size_t>(-1) && holding.count(other) && seen.insert(other).second)
          stack.push_back(other);
      }
    }
    if (seen != holding) return false;
  }
  return true;
}

}  // namespace oracle
