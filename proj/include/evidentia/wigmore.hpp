#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evidentia/error.hpp"
#include "evidentia/graph.hpp"

namespace evidentia {

enum class NodeKind { probandum, subprobandum, evidence, testimony, inference_step };
enum class Polarity { supports, opposes };

inline std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::probandum: return "probandum";
    case NodeKind::subprobandum: return "subprobandum";
    case NodeKind::evidence: return "evidence";
    case NodeKind::testimony: return "testimony";
    case NodeKind::inference_step: return "inference_step";
  }
  return "evidence";
}

inline NodeKind node_kind_from(const std::string& s) {
  if (s == "probandum") return NodeKind::probandum;
  if (s == "subprobandum") return NodeKind::subprobandum;
  if (s == "evidence") return NodeKind::evidence;
  if (s == "testimony") return NodeKind::testimony;
  if (s == "inference_step") return NodeKind::inference_step;
  throw ParseError("unknown chart node kind '" + s + "'");
}

inline std::string to_string(Polarity p) { return p == Polarity::supports ? "supports" : "opposes"; }

inline Polarity polarity_from(const std::string& s) {
  if (s == "supports") return Polarity::supports;
  if (s == "opposes") return Polarity::opposes;
  throw ParseError("unknown edge polarity '" + s + "'");
}

inline bool is_probandum_kind(NodeKind k) { return k == NodeKind::probandum || k == NodeKind::subprobandum; }

struct ChartNode {
  NodeId id;
  NodeKind kind = NodeKind::evidence;
  std::string text;
  std::optional<std::string> item_ref;
  std::optional<std::string> source;

  bool operator==(const ChartNode&) const = default;
};

// Arrows point from evidence towards the proposition they bear on.
struct ChartEdge {
  NodeId from;
  NodeId to;
  Polarity polarity = Polarity::supports;

  bool operator==(const ChartEdge&) const = default;
};

class WigmoreChart {
 public:
  WigmoreChart() = default;

  const std::map<NodeId, ChartNode>& nodes() const { return nodes_; }
  const std::vector<ChartEdge>& edges() const { return edges_; }
  const NodeId& probandum() const { return probandum_; }

  const ChartNode& node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw UnknownNode("unknown chart node '" + id + "'");
    return it->second;
  }

  bool contains(const NodeId& id) const { return nodes_.count(id) > 0; }

  std::vector<const ChartEdge*> incoming(const NodeId& id) const {
    std::vector<const ChartEdge*> out;
    for (const auto& e : edges_)
      if (e.to == id) out.push_back(&e);
    return out;
  }

  std::vector<const ChartEdge*> outgoing(const NodeId& id) const {
    std::vector<const ChartEdge*> out;
    for (const auto& e : edges_)
      if (e.from == id) out.push_back(&e);
    return out;
  }

  bool operator==(const WigmoreChart&) const = default;

 private:
  friend WigmoreChart build_chart(std::vector<ChartNode>, std::vector<ChartEdge>, NodeId);

  std::map<NodeId, ChartNode> nodes_;
  std::vector<ChartEdge> edges_;
  NodeId probandum_;
};

inline WigmoreChart build_chart(std::vector<ChartNode> nodes, std::vector<ChartEdge> edges, NodeId probandum) {
  WigmoreChart chart;
  bool any_probandum = false;
  for (auto& n : nodes) {
    if (n.id.empty()) throw InvalidChart("chart node ids must be non-empty");
    if (n.kind == NodeKind::testimony && !n.item_ref && !n.source)
      throw InvalidChart("testimony node '" + n.id + "' needs an item reference or a source");
    any_probandum = any_probandum || n.kind == NodeKind::probandum;
    NodeId id = n.id;
    if (!chart.nodes_.emplace(id, std::move(n)).second) throw InvalidChart("duplicate chart node '" + id + "'");
  }
  if (!any_probandum) throw MissingProbandum("a chart needs at least one probandum node");
  auto it = chart.nodes_.find(probandum);
  if (it == chart.nodes_.end()) throw MissingProbandum("designated probandum '" + probandum + "' is not in the chart");
  if (!is_probandum_kind(it->second.kind))
    throw MissingProbandum("designated probandum '" + probandum + "' is not a probandum or subprobandum");

  NodeSet ids;
  for (const auto& [id, _] : chart.nodes_) ids.insert(id);
  Dag dag(ids);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& e : edges) {
    if (!chart.nodes_.count(e.from) || !chart.nodes_.count(e.to))
      throw UnknownNode("edge '" + e.from + "' -> '" + e.to + "' names an unknown node");
    if (!seen.emplace(e.from, e.to).second)
      throw InvalidChart("duplicate edge '" + e.from + "' -> '" + e.to + "'");
    dag = dag.add_edge(e.from, e.to);  // CycleError on self-edges and cycles
  }
  chart.edges_ = std::move(edges);
  chart.probandum_ = std::move(probandum);
  return chart;
}

struct Relevance {
  NodeSet relevant;
  NodeSet irrelevant;
};

// Relevant nodes have a directed path, through either polarity, to the
// designated probandum.
inline Relevance relevant_items(const WigmoreChart& chart) {
  std::map<NodeId, std::vector<NodeId>> into;
  for (const auto& e : chart.edges()) into[e.to].push_back(e.from);
  NodeSet reach;
  std::deque<NodeId> frontier{chart.probandum()};
  while (!frontier.empty()) {
    NodeId v = std::move(frontier.front());
    frontier.pop_front();
    for (const auto& u : into[v])
      if (u != chart.probandum() && reach.insert(u).second) frontier.push_back(u);
  }
  Relevance out;
  out.relevant = reach;
  for (const auto& [id, _] : chart.nodes())
    if (id != chart.probandum() && !reach.count(id)) out.irrelevant.insert(id);
  return out;
}

struct ArgumentChain {
  std::vector<NodeId> nodes;  // from the item to the target
  std::vector<Polarity> polarities;

  Polarity terminal() const { return polarities.back(); }
};

// All simple directed paths from `item` to `target` (the designated
// probandum by default).
inline std::vector<ArgumentChain> argument_chains(const WigmoreChart& chart, const NodeId& item,
                                                  std::optional<NodeId> target = std::nullopt) {
  chart.node(item);
  NodeId goal = target.value_or(chart.probandum());
  chart.node(goal);
  std::map<NodeId, std::vector<const ChartEdge*>> out;
  for (const auto& e : chart.edges()) out[e.from].push_back(&e);
  for (auto& [_, v] : out)
    std::sort(v.begin(), v.end(), [](const auto* a, const auto* b) { return a->to < b->to; });

  std::vector<ArgumentChain> chains;
  if (item == goal) {
    chains.push_back({{item}, {}});
    return chains;
  }
  ArgumentChain current{{item}, {}};
  std::set<NodeId> on_path{item};
  std::function<void(const NodeId&)> walk = [&](const NodeId& v) {
    for (const auto* e : out[v]) {
      if (on_path.count(e->to)) continue;
      current.nodes.push_back(e->to);
      current.polarities.push_back(e->polarity);
      if (e->to == goal) {
        chains.push_back(current);
      } else {
        on_path.insert(e->to);
        walk(e->to);
        on_path.erase(e->to);
      }
      current.nodes.pop_back();
      current.polarities.pop_back();
    }
  };
  walk(item);
  return chains;
}

struct OppositionTally {
  std::size_t supporting = 0;
  std::size_t opposing = 0;

  bool operator==(const OppositionTally&) const = default;
};

// For each probandum or subprobandum: the chains reaching it from source
// nodes (nodes with no incoming edge), split by the polarity of their last
// edge.
inline std::map<NodeId, OppositionTally> opposition_summary(const WigmoreChart& chart) {
  std::set<NodeId> has_incoming;
  for (const auto& e : chart.edges()) has_incoming.insert(e.to);
  std::map<NodeId, OppositionTally> out;
  for (const auto& [target, node] : chart.nodes()) {
    if (!is_probandum_kind(node.kind)) continue;
    OppositionTally tally;
    for (const auto& [source, _] : chart.nodes()) {
      if (source == target || has_incoming.count(source)) continue;
      for (const auto& chain : argument_chains(chart, source, target))
        (chain.terminal() == Polarity::supports ? tally.supporting : tally.opposing)++;
    }
    out[target] = tally;
  }
  return out;
}

}  // namespace evidentia
