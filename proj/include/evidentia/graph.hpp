#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "evidentia/error.hpp"

namespace evidentia {

using NodeId = std::string;
using NodeSet = std::set<NodeId>;

struct Edge {
  NodeId tail;
  NodeId head;

  auto operator<=>(const Edge&) const = default;
};

// Directed acyclic graph over string node ids. Values are immutable: every
// mutator returns a new graph and leaves the receiver untouched.
class Dag {
 public:
  Dag() = default;

  explicit Dag(const NodeSet& nodes) {
    for (const auto& v : nodes) insert_node(v);
  }

  // Builds a DAG from a node set and an edge list; each edge is checked for
  // cycles as it is inserted.
  Dag(const NodeSet& nodes, const std::vector<Edge>& edges) : Dag(nodes) {
    for (const auto& e : edges) insert_edge(e.tail, e.head);
  }

  Dag add_node(const NodeId& v) const {
    Dag out = *this;
    out.insert_node(v);
    return out;
  }

  Dag add_edge(const NodeId& tail, const NodeId& head) const {
    Dag out = *this;
    out.insert_edge(tail, head);
    return out;
  }

  bool contains(const NodeId& v) const { return nodes_.count(v) > 0; }
  const NodeSet& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  bool has_edge(const NodeId& tail, const NodeId& head) const {
    auto it = children_.find(tail);
    return it != children_.end() && it->second.count(head) > 0;
  }

  // Sorted by (tail, head).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (const auto& [tail, heads] : children_)
      for (const auto& head : heads) out.push_back({tail, head});
    return out;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& [_, heads] : children_) n += heads.size();
    return n;
  }

  const NodeSet& parents(const NodeId& v) const { return lookup(parents_, v); }
  const NodeSet& children(const NodeId& v) const { return lookup(children_, v); }

  // Strict ancestors of every node in `of`.
  NodeSet ancestors(const NodeSet& of) const {
    NodeSet seen;
    std::vector<NodeId> stack;
    for (const auto& v : of) {
      require(v);
      stack.push_back(v);
    }
    while (!stack.empty()) {
      NodeId v = std::move(stack.back());
      stack.pop_back();
      for (const auto& p : parents_.at(v))
        if (seen.insert(p).second) stack.push_back(p);
    }
    return seen;
  }

  NodeSet descendants(const NodeId& v) const {
    require(v);
    NodeSet seen;
    std::vector<NodeId> stack{v};
    while (!stack.empty()) {
      NodeId u = std::move(stack.back());
      stack.pop_back();
      for (const auto& c : children_.at(u))
        if (seen.insert(c).second) stack.push_back(c);
    }
    return seen;
  }

  // True when `to` can be reached from `from` by following arrows.
  bool reaches(const NodeId& from, const NodeId& to) const {
    if (from == to) return true;
    NodeSet seen{from};
    std::vector<NodeId> stack{from};
    while (!stack.empty()) {
      NodeId u = std::move(stack.back());
      stack.pop_back();
      for (const auto& c : children_.at(u)) {
        if (c == to) return true;
        if (seen.insert(c).second) stack.push_back(c);
      }
    }
    return false;
  }

  void require(const NodeId& v) const {
    if (!contains(v)) throw UnknownNode("unknown node '" + v + "'");
  }

  bool operator==(const Dag& other) const {
    return nodes_ == other.nodes_ && children_ == other.children_;
  }

 private:
  static const NodeSet& lookup(const std::map<NodeId, NodeSet>& m, const NodeId& v) {
    auto it = m.find(v);
    if (it == m.end()) throw UnknownNode("unknown node '" + v + "'");
    return it->second;
  }

  void insert_node(const NodeId& v) {
    if (v.empty()) throw InvalidModel("node ids must be non-empty");
    if (!nodes_.insert(v).second) throw DuplicateNode("duplicate node '" + v + "'");
    parents_[v];
    children_[v];
  }

  void insert_edge(const NodeId& tail, const NodeId& head) {
    require(tail);
    require(head);
    if (tail == head) throw CycleError("self-loop on '" + tail + "'");
    if (has_edge(tail, head))
      throw InvalidModel("duplicate edge '" + tail + "' -> '" + head + "'");
    if (reaches(head, tail))
      throw CycleError("edge '" + tail + "' -> '" + head + "' would close a directed cycle");
    children_[tail].insert(head);
    parents_[head].insert(tail);
  }

  NodeSet nodes_;
  std::map<NodeId, NodeSet> parents_;
  std::map<NodeId, NodeSet> children_;
};

// Undirected graph without self-loops.
class UGraph {
 public:
  UGraph() = default;
  explicit UGraph(const NodeSet& nodes) {
    for (const auto& v : nodes) adjacency_[v];
  }

  UGraph add_arc(const NodeId& a, const NodeId& b) const {
    UGraph out = *this;
    out.insert_arc(a, b);
    return out;
  }

  bool contains(const NodeId& v) const { return adjacency_.count(v) > 0; }

  NodeSet nodes() const {
    NodeSet out;
    for (const auto& [v, _] : adjacency_) out.insert(v);
    return out;
  }

  bool adjacent(const NodeId& a, const NodeId& b) const {
    auto it = adjacency_.find(a);
    return it != adjacency_.end() && it->second.count(b) > 0;
  }

  const NodeSet& neighbours(const NodeId& v) const {
    auto it = adjacency_.find(v);
    if (it == adjacency_.end()) throw UnknownNode("unknown node '" + v + "'");
    return it->second;
  }

  // Each arc once, as (smaller, larger).
  std::vector<std::pair<NodeId, NodeId>> arcs() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    for (const auto& [a, nbrs] : adjacency_)
      for (const auto& b : nbrs)
        if (a < b) out.emplace_back(a, b);
    return out;
  }

  std::size_t arc_count() const { return arcs().size(); }

  bool operator==(const UGraph&) const = default;

 private:
  friend UGraph moralize(const Dag& g);

  void insert_arc(const NodeId& a, const NodeId& b) {
    if (!contains(a)) throw UnknownNode("unknown node '" + a + "'");
    if (!contains(b)) throw UnknownNode("unknown node '" + b + "'");
    if (a == b) throw InvalidModel("self-loop on '" + a + "'");
    adjacency_[a].insert(b);
    adjacency_[b].insert(a);
  }

  std::map<NodeId, NodeSet> adjacency_;
};

// A conditional-independence query: is A independent of B given C?
struct CiQuery {
  NodeSet a;
  NodeSet b;
  NodeSet c;
};

inline NodeSet parents(const Dag& g, const NodeId& v) { return g.parents(v); }

// Keeps `keep` and all of its ancestors together with every edge among them.
inline Dag ancestral_graph(const Dag& g, const NodeSet& keep) {
  NodeSet retained = g.ancestors(keep);
  retained.insert(keep.begin(), keep.end());
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    if (retained.count(e.tail) && retained.count(e.head)) edges.push_back(e);
  return Dag(retained, edges);
}

// Marries co-parents, then drops directions.
inline UGraph moralize(const Dag& g) {
  UGraph u(g.nodes());
  for (const auto& e : g.edges()) u.insert_arc(e.tail, e.head);
  for (const auto& v : g.nodes()) {
    const auto& pa = g.parents(v);
    for (auto i = pa.begin(); i != pa.end(); ++i)
      for (auto j = std::next(i); j != pa.end(); ++j) u.insert_arc(*i, *j);
  }
  return u;
}

namespace detail {

inline void require_all(const UGraph& u, const NodeSet& s) {
  for (const auto& v : s)
    if (!u.contains(v)) throw UnknownNode("unknown node '" + v + "'");
}

inline bool disjoint(const NodeSet& x, const NodeSet& y) {
  for (const auto& v : x)
    if (y.count(v)) return false;
  return true;
}

}  // namespace detail

// True iff every path from `a` to `b` enters `c`.
inline bool separated(const UGraph& u, const NodeSet& a, const NodeSet& b, const NodeSet& c) {
  detail::require_all(u, a);
  detail::require_all(u, b);
  detail::require_all(u, c);
  if (a.empty() || b.empty()) throw InvalidQuery("separation sets a and b must be non-empty");
  if (!detail::disjoint(a, b) || !detail::disjoint(a, c) || !detail::disjoint(b, c))
    throw InvalidQuery("separation sets must be pairwise disjoint");

  NodeSet seen(a.begin(), a.end());
  std::deque<NodeId> frontier(a.begin(), a.end());
  while (!frontier.empty()) {
    NodeId v = std::move(frontier.front());
    frontier.pop_front();
    for (const auto& w : u.neighbours(v)) {
      if (c.count(w) || seen.count(w)) continue;
      if (b.count(w)) return false;
      seen.insert(w);
      frontier.push_back(w);
    }
  }
  return true;
}

inline void validate_query(const Dag& g, const CiQuery& q) {
  if (q.a.empty() || q.b.empty()) throw InvalidQuery("query sets a and b must be non-empty");
  for (const auto* s : {&q.a, &q.b, &q.c})
    for (const auto& v : *s)
      if (!g.contains(v)) throw InvalidQuery("query names unknown node '" + v + "'");
  if (!detail::disjoint(q.a, q.b) || !detail::disjoint(q.a, q.c) || !detail::disjoint(q.b, q.c))
    throw InvalidQuery("query sets must be pairwise disjoint");
}

// Ancestral graph, moralisation, then separation.
inline bool query_ci(const Dag& g, const CiQuery& q) {
  validate_query(g, q);
  NodeSet involved = q.a;
  involved.insert(q.b.begin(), q.b.end());
  involved.insert(q.c.begin(), q.c.end());
  return separated(moralize(ancestral_graph(g, involved)), q.a, q.b, q.c);
}

// Kahn's algorithm, always releasing the lexicographically smallest ready node.
inline std::vector<NodeId> topological_order(const Dag& g) {
  std::map<NodeId, std::size_t> indegree;
  std::set<NodeId> ready;
  for (const auto& v : g.nodes()) {
    indegree[v] = g.parents(v).size();
    if (indegree[v] == 0) ready.insert(v);
  }
  std::vector<NodeId> order;
  order.reserve(g.size());
  while (!ready.empty()) {
    NodeId v = *ready.begin();
    ready.erase(ready.begin());
    for (const auto& c : g.children(v))
      if (--indegree[c] == 0) ready.insert(c);
    order.push_back(std::move(v));
  }
  return order;
}

}  // namespace evidentia
