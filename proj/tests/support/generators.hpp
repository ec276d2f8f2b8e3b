#pragma once

// Hand-rolled random generators for property tests. Every generator takes
// the engine by reference so a test's seed fixes the whole case.

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "evidentia/bn.hpp"
#include "evidentia/ceg.hpp"
#include "evidentia/wigmore.hpp"

namespace gen {

using namespace evidentia;
using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline bool coin(Rng& rng, double p = 0.5) { return unit(rng) < p; }

// Random DAG: edges only go forward in a random permutation of the names.
inline Dag dag(Rng& rng, std::size_t n, double edge_p) {
  std::vector<NodeId> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("X" + std::to_string(i));
  std::shuffle(names.begin(), names.end(), rng);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng, edge_p)) edges.push_back({names[i], names[j]});
  return Dag(NodeSet(names.begin(), names.end()), edges);
}

// Strictly positive probability vector, or one with a zero when `zeros`.
inline std::vector<double> distribution(Rng& rng, std::size_t k, double zero_p = 0.0) {
  std::vector<double> row(k);
  double sum = 0.0;
  for (auto& x : row) {
    x = coin(rng, zero_p) ? 0.0 : 0.05 + unit(rng);
    sum += x;
  }
  if (sum == 0.0) {
    row[uniform(rng, 0, k - 1)] = 1.0;
    return row;
  }
  for (auto& x : row) x /= sum;
  return row;
}

inline std::vector<std::vector<double>> rows_for(Rng& rng, std::size_t count, std::size_t card, double zero_p) {
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < count; ++r) rows.push_back(distribution(rng, card, zero_p));
  return rows;
}

// Random parameterization of a given DAG.
inline DiscreteBayesNet parameterize(Rng& rng, const Dag& g, const std::map<NodeId, std::size_t>& card,
                                     double zero_p = 0.0) {
  std::vector<StateSpace> spaces;
  std::vector<Cpt> cpts;
  for (const auto& v : g.nodes()) {
    StateSpace s{v, {}, false};
    for (std::size_t k = 0; k < card.at(v); ++k) s.states.push_back("s" + std::to_string(k));
    spaces.push_back(s);
    std::vector<NodeId> parents(g.parents(v).begin(), g.parents(v).end());
    std::shuffle(parents.begin(), parents.end(), rng);
    std::size_t count = 1;
    for (const auto& p : parents) count *= card.at(p);
    cpts.push_back({v, parents, rows_for(rng, count, card.at(v), zero_p)});
  }
  return DiscreteBayesNet(g, spaces, cpts);
}

inline std::map<NodeId, std::size_t> cardinalities(Rng& rng, const Dag& g, std::size_t max_card) {
  std::map<NodeId, std::size_t> card;
  for (const auto& v : g.nodes()) card[v] = uniform(rng, 2, max_card);
  return card;
}

// Random network whose joint table has at most `max_joint` entries.
inline DiscreteBayesNet net(Rng& rng, std::size_t max_nodes, std::size_t max_card, std::size_t max_joint,
                            double zero_p = 0.0) {
  while (true) {
    Dag g = dag(rng, uniform(rng, 1, max_nodes), unit(rng) * 0.7);
    auto card = cardinalities(rng, g, max_card);
    std::size_t joint = 1;
    for (const auto& [_, k] : card) joint *= k;
    if (joint <= max_joint) return parameterize(rng, g, card, zero_p);
  }
}

// Random hard and soft evidence on disjoint nodes.
inline EvidenceSet evidence(Rng& rng, const DiscreteBayesNet& n) {
  EvidenceSet ev;
  for (const auto& v : n.dag().nodes()) {
    double r = unit(rng);
    const auto& states = n.space(v).states;
    if (r < 0.25) {
      ev.hard[v] = states[uniform(rng, 0, states.size() - 1)];
    } else if (r < 0.4) {
      std::vector<double> w;
      for (std::size_t k = 0; k < states.size(); ++k) w.push_back(coin(rng, 0.2) ? 0.0 : 0.1 + 2 * unit(rng));
      if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
      ev.soft[v] = w;
    }
  }
  return ev;
}

// Random subset of `from`, excluding `avoid`.
inline NodeSet subset(Rng& rng, const NodeSet& from, const NodeSet& avoid, double p) {
  NodeSet out;
  for (const auto& v : from)
    if (!avoid.count(v) && coin(rng, p)) out.insert(v);
  return out;
}

// Random staged tree with at most `max_vertices` vertices. Florets use labels
// a, b, c... so that same-sized florets can share a stage.
inline StagedTree staged_tree(Rng& rng, std::size_t max_vertices) {
  std::vector<NodeId> vertices{"r"};
  std::vector<TreeEdge> edges;
  std::vector<NodeId> leaves{"r"};
  std::map<NodeId, std::size_t> degree;
  std::size_t next = 0;
  while (true) {
    std::size_t k = uniform(rng, 2, 3);
    if (vertices.size() + k > max_vertices) break;
    std::size_t pick = uniform(rng, 0, leaves.size() - 1);
    NodeId v = leaves[pick];
    leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
    degree[v] = k;
    for (std::size_t i = 0; i < k; ++i) {
      NodeId c = "t" + std::to_string(next++);
      vertices.push_back(c);
      leaves.push_back(c);
      edges.push_back({v, c, std::string(1, static_cast<char>('a' + i)), coin(rng, 0.2), {}});
    }
    if (coin(rng, 0.15)) break;
  }
  if (edges.empty()) {
    vertices = {"r", "t0", "t1"};
    edges = {{"r", "t0", "a", false, {}}, {"r", "t1", "b", false, {}}};
    degree["r"] = 2;
  }
  // Group same-degree vertices into stages at random.
  std::map<std::size_t, std::vector<NodeId>> by_degree;
  for (const auto& [v, k] : degree) by_degree[k].push_back(v);
  std::vector<Stage> stages;
  StageProbabilities probs;
  std::size_t sid = 0;
  for (auto& [k, vs] : by_degree) {
    std::shuffle(vs.begin(), vs.end(), rng);
    std::size_t i = 0;
    while (i < vs.size()) {
      std::size_t size = uniform(rng, 1, vs.size() - i);
      Stage s{"u" + std::to_string(sid++), {}, {}};
      for (std::size_t j = 0; j < k; ++j) s.labels.push_back(std::string(1, static_cast<char>('a' + j)));
      for (std::size_t j = i; j < i + size; ++j) s.members[vs[j]];
      auto p = distribution(rng, k);
      for (std::size_t j = 0; j < k; ++j) probs[s.id][s.labels[j]] = p[j];
      stages.push_back(std::move(s));
      i += size;
    }
  }
  return StagedTree(EventTree(vertices, std::move(edges)), std::move(stages), std::move(probs));
}

// Random path predicate over a CEG's labels and positions.
inline PathFilter path_filter(Rng& rng, const Ceg& c) {
  std::set<std::string> labels;
  for (const auto& e : c.edges()) labels.insert(e.label);
  PathFilter f;
  for (const auto& l : labels) {
    double r = unit(rng);
    if (r < 0.2) f.require_labels.push_back(l);
    else if (r < 0.35) f.exclude_labels.push_back(l);
  }
  for (const auto& p : c.positions())
    if (coin(rng, 0.1)) f.through_positions.push_back(p.id);
  return f;
}

// Random acyclic chart with one probandum; edges go from higher to lower
// index in a shuffled order.
inline WigmoreChart chart(Rng& rng, std::size_t max_nodes) {
  std::size_t n = uniform(rng, 1, max_nodes);
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
  std::shuffle(ids.begin(), ids.end(), rng);
  std::size_t p = uniform(rng, 0, n - 1);
  std::vector<ChartNode> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    ChartNode node{ids[i], NodeKind::evidence, "node " + ids[i], std::nullopt, std::nullopt};
    if (i == p) {
      node.kind = NodeKind::probandum;
    } else {
      static const NodeKind kinds[] = {NodeKind::evidence, NodeKind::testimony, NodeKind::inference_step,
                                       NodeKind::subprobandum};
      node.kind = kinds[uniform(rng, 0, 3)];
      if (node.kind == NodeKind::testimony) node.item_ref = ids[i];
    }
    nodes.push_back(std::move(node));
  }
  std::vector<ChartEdge> edges;
  double density = unit(rng) * 3.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (coin(rng, density)) edges.push_back({ids[i], ids[j], coin(rng, 0.3) ? Polarity::opposes : Polarity::supports});
  return build_chart(std::move(nodes), std::move(edges), ids[p]);
}

}  // namespace gen
