#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "evidentia/bn.hpp"
#include "evidentia/enumeration.hpp"
#include "evidentia/error.hpp"
#include "evidentia/graph.hpp"

namespace evidentia {

inline constexpr double kStageSumTolerance = 1e-9;
inline constexpr double kNoSurvivingMass = 1e-15;

// ---------------------------------------------------------------------------
// Event trees
// ---------------------------------------------------------------------------

struct TreeEdge {
  NodeId tail;
  NodeId head;
  std::string label;
  bool evidence = false;           // an observed-evidence edge rather than a proposition
  std::vector<std::string> items;  // corpus item numbers the edge refers to

  bool operator==(const TreeEdge&) const = default;
};

struct Branch {
  std::string label;
  NodeId child;
  bool evidence = false;
  std::vector<std::string> items = {};
};

// One vertex and its outgoing edges.
struct FloretSpec {
  NodeId vertex;
  std::vector<Branch> branches;
};

class EventTree {
 public:
  EventTree() = default;

  // Throws Disconnected unless the edges form a single tree spanning
  // `vertices`, and DuplicateSiblingLabel on repeated labels in a floret.
  EventTree(const std::vector<NodeId>& vertices, std::vector<TreeEdge> edges) : edges_(std::move(edges)) {
    for (const auto& v : vertices) {
      if (v.empty()) throw InvalidModel("vertex ids must be non-empty");
      if (!vertices_.insert(v).second) throw InvalidModel("duplicate vertex '" + v + "'");
      out_[v];
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      if (!vertices_.count(e.tail) || !vertices_.count(e.head))
        throw Disconnected("edge '" + e.tail + "' -> '" + e.head + "' names an unknown vertex");
      if (!in_.emplace(e.head, i).second)
        throw Disconnected("vertex '" + e.head + "' has more than one incoming edge");
      out_[e.tail].push_back(i);
    }
    for (auto& [v, out] : out_) {
      std::sort(out.begin(), out.end(), [&](auto a, auto b) { return edges_[a].label < edges_[b].label; });
      for (std::size_t k = 1; k < out.size(); ++k)
        if (edges_[out[k]].label == edges_[out[k - 1]].label)
          throw DuplicateSiblingLabel("vertex '" + v + "' has two edges labelled '" + edges_[out[k]].label + "'");
    }
    std::vector<NodeId> roots;
    for (const auto& v : vertices_)
      if (!in_.count(v)) roots.push_back(v);
    if (roots.size() != 1) throw Disconnected("an event tree needs exactly one root, found " + std::to_string(roots.size()));
    root_ = roots.front();
    if (bfs_order().size() != vertices_.size()) throw Disconnected("some vertices are not reachable from the root");
  }

  const NodeId& root() const { return root_; }
  const NodeSet& vertices() const { return vertices_; }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  bool contains(const NodeId& v) const { return vertices_.count(v) > 0; }

  // Outgoing edges in label order.
  std::vector<const TreeEdge*> out_edges(const NodeId& v) const {
    auto it = out_.find(v);
    if (it == out_.end()) throw UnknownNode("unknown vertex '" + v + "'");
    std::vector<const TreeEdge*> out;
    for (auto i : it->second) out.push_back(&edges_[i]);
    return out;
  }

  bool is_leaf(const NodeId& v) const { return out_edges(v).empty(); }

  const TreeEdge* incoming(const NodeId& v) const {
    auto it = in_.find(v);
    return it == in_.end() ? nullptr : &edges_[it->second];
  }

  std::vector<NodeId> leaves() const {
    std::vector<NodeId> out;
    for (const auto& v : vertices_)
      if (out_.at(v).empty()) out.push_back(v);
    return out;
  }

  std::vector<NodeId> internal_vertices() const {
    std::vector<NodeId> out;
    for (const auto& v : vertices_)
      if (!out_.at(v).empty()) out.push_back(v);
    return out;
  }

  // Root first, children in label order.
  std::vector<NodeId> bfs_order() const {
    std::vector<NodeId> order{root_};
    for (std::size_t i = 0; i < order.size(); ++i)
      for (auto e : out_.at(order[i])) order.push_back(edges_[e].head);
    return order;
  }

  bool operator==(const EventTree& other) const {
    return vertices_ == other.vertices_ && root_ == other.root_ && sorted_edges() == other.sorted_edges();
  }

 private:
  std::vector<TreeEdge> sorted_edges() const {
    auto out = edges_;
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return std::tie(a.tail, a.label) < std::tie(b.tail, b.label); });
    return out;
  }

  NodeId root_;
  NodeSet vertices_;
  std::vector<TreeEdge> edges_;
  std::map<NodeId, std::vector<std::size_t>> out_;
  std::map<NodeId, std::size_t> in_;
};

inline EventTree build_event_tree(const std::vector<FloretSpec>& florets) {
  std::vector<NodeId> vertices;
  std::set<NodeId> seen;
  std::vector<TreeEdge> edges;
  auto note = [&](const NodeId& v) {
    if (seen.insert(v).second) vertices.push_back(v);
  };
  for (const auto& f : florets) {
    note(f.vertex);
    for (const auto& b : f.branches) {
      note(b.child);
      edges.push_back({f.vertex, b.child, b.label, b.evidence, b.items});
    }
  }
  return EventTree(vertices, std::move(edges));
}

// ---------------------------------------------------------------------------
// Staging
// ---------------------------------------------------------------------------

// A set of vertices sharing one probability vector. Each member maps its own
// edge labels onto the stage's labels.
struct Stage {
  std::string id;
  std::vector<std::string> labels;
  std::map<NodeId, std::map<std::string, std::string>> members;

  bool operator==(const Stage&) const = default;
};

using StageProbabilities = std::map<std::string, std::map<std::string, double>>;

struct TreePath {
  std::vector<NodeId> vertices;
  std::vector<std::string> labels;        // stage labels
  std::vector<std::string> local_labels;  // labels as written on the tree
  double probability = 1.0;
};

class StagedTree {
 public:
  StagedTree() = default;

  // Internal vertices not named by any stage get a singleton stage whose id
  // is the vertex id. Members given an empty correspondence map their labels
  // to themselves.
  StagedTree(EventTree tree, std::vector<Stage> stages, StageProbabilities probabilities = {})
      : tree_(std::move(tree)), probabilities_(std::move(probabilities)) {
    std::set<NodeId> staged;
    for (auto& s : stages) {
      if (s.id.empty()) throw InvalidModel("stage ids must be non-empty");
      for (auto& [v, corr] : s.members) {
        staged.insert(v);
        if (corr.empty() && tree_.contains(v)) {
          for (const auto* e : tree_.out_edges(v)) corr[e->label] = e->label;
          if (s.labels.empty())
            for (const auto& [local, slot] : corr) s.labels.push_back(slot);
        }
      }
    }
    for (const auto& v : tree_.internal_vertices()) {
      if (staged.count(v)) continue;
      Stage s{v, {}, {}};
      for (const auto* e : tree_.out_edges(v)) {
        s.labels.push_back(e->label);
        s.members[v][e->label] = e->label;
      }
      stages.push_back(std::move(s));
    }
    for (auto& s : stages) {
      std::string id = s.id;
      if (!stages_.emplace(id, std::move(s)).second) throw InvalidModel("duplicate stage id '" + id + "'");
    }
    for (const auto& [id, s] : stages_)
      for (const auto& [v, _] : s.members) stage_of_.emplace(v, id);
  }

  // Every internal vertex in its own stage.
  static StagedTree discrete(EventTree tree, StageProbabilities probabilities = {}) {
    return StagedTree(std::move(tree), {}, std::move(probabilities));
  }

  const EventTree& tree() const { return tree_; }
  const std::map<std::string, Stage>& stages() const { return stages_; }
  const StageProbabilities& probabilities() const { return probabilities_; }

  const Stage& stage(const std::string& id) const {
    auto it = stages_.find(id);
    if (it == stages_.end()) throw InvalidModel("unknown stage '" + id + "'");
    return it->second;
  }

  const std::string& stage_of(const NodeId& v) const {
    auto it = stage_of_.find(v);
    if (it == stage_of_.end()) throw LeafStaging("vertex '" + v + "' has no stage");
    return it->second;
  }

  const std::string& slot(const NodeId& v, const std::string& local_label) const {
    const Stage& s = stage(stage_of(v));
    return s.members.at(v).at(local_label);
  }

  std::optional<double> probability(const std::string& stage_id, const std::string& slot_label) const {
    auto it = probabilities_.find(stage_id);
    if (it == probabilities_.end()) return std::nullopt;
    auto jt = it->second.find(slot_label);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  }

  double edge_probability(const TreeEdge& e) const {
    const auto& sid = stage_of(e.tail);
    auto p = probability(sid, slot(e.tail, e.label));
    if (!p) throw UnassignedStageProbability("stage '" + sid + "' has no probability for '" + e.label + "'");
    return *p;
  }

  StagedTree with_probabilities(const std::string& stage_id, std::map<std::string, double> values) const {
    stage(stage_id);
    StagedTree out = *this;
    out.probabilities_[stage_id] = std::move(values);
    return out;
  }

  // Root-to-leaf paths in depth-first label order.
  std::vector<TreePath> paths() const {
    std::vector<TreePath> out;
    TreePath current;
    std::function<void(const NodeId&, double)> walk = [&](const NodeId& v, double p) {
      current.vertices.push_back(v);
      auto edges = tree_.out_edges(v);
      if (edges.empty()) {
        TreePath done = current;
        done.probability = p;
        out.push_back(std::move(done));
      }
      for (const auto* e : edges) {
        current.labels.push_back(slot(v, e->label));
        current.local_labels.push_back(e->label);
        walk(e->head, p * edge_probability(*e));
        current.labels.pop_back();
        current.local_labels.pop_back();
      }
      current.vertices.pop_back();
    };
    walk(tree_.root(), 1.0);
    return out;
  }

  bool operator==(const StagedTree& other) const {
    return tree_ == other.tree_ && stages_ == other.stages_ && probabilities_ == other.probabilities_;
  }

 private:
  EventTree tree_;
  std::map<std::string, Stage> stages_;
  std::map<NodeId, std::string> stage_of_;
  StageProbabilities probabilities_;
};

inline ValidationReport validate_staging(const StagedTree& st) {
  ValidationReport report;
  auto add = [&](std::string code, std::string subject, std::string message) {
    report.push_back({std::move(code), std::move(subject), std::move(message)});
  };
  const EventTree& tree = st.tree();
  std::map<NodeId, std::string> owner;
  for (const auto& [id, s] : st.stages()) {
    std::set<std::string> slots(s.labels.begin(), s.labels.end());
    if (slots.size() != s.labels.size()) add("floret-mismatch", id, "stage labels are not unique");
    if (s.members.empty()) add("empty-stage", id, "stage has no members");
    for (const auto& [v, corr] : s.members) {
      if (!owner.emplace(v, id).second) add("duplicate-member", v, "vertex belongs to two stages");
      if (!tree.contains(v)) {
        add("unknown-vertex", id, "stage member '" + v + "' is not a vertex");
        continue;
      }
      auto edges = tree.out_edges(v);
      if (edges.empty()) {
        add("leaf-staging", v, "leaves cannot be staged");
        continue;
      }
      std::set<std::string> local, image;
      for (const auto* e : edges) local.insert(e->label);
      bool bijective = edges.size() == s.labels.size() && corr.size() == edges.size();
      for (const auto& [from, to] : corr) {
        if (!local.count(from) || !slots.count(to)) bijective = false;
        image.insert(to);
      }
      if (!bijective || image.size() != slots.size())
        add("floret-mismatch", v, "floret of '" + v + "' does not correspond to the labels of stage '" + id + "'");
    }
    auto it = st.probabilities().find(id);
    if (it == st.probabilities().end()) {
      add("missing-probability", id, "stage has no probability vector");
      continue;
    }
    double sum = 0.0;
    for (const auto& label : s.labels) {
      auto jt = it->second.find(label);
      if (jt == it->second.end()) {
        add("missing-probability", id, "no probability for label '" + label + "'");
        continue;
      }
      double p = jt->second;
      if (!std::isfinite(p) || p < 0.0) add("negative-probability", id, "probability of '" + label + "' is negative");
      if (p == 0.0)
        add("explicit-zero", id,
            "probability of '" + label + "' is zero; omit logically impossible edges instead of giving them probability 0");
      sum += p;
    }
    for (const auto& [label, _] : it->second)
      if (!slots.count(label)) add("unknown-label", id, "probability given for unknown label '" + label + "'");
    if (std::abs(sum - 1.0) > kStageSumTolerance) {
      std::ostringstream msg;
      msg << "stage probabilities sum to " << sum;
      add("probability-sum", id, msg.str());
    }
  }
  for (const auto& [id, _] : st.probabilities())
    if (!st.stages().count(id)) add("unknown-stage", id, "probabilities given for an unknown stage");
  return report;
}

// Puts `members` into a new stage `stage_id`, removing them from their old
// stages. An empty correspondence means labels map to themselves.
inline StagedTree assign_stage(const StagedTree& st, const std::string& stage_id,
                               const std::map<NodeId, std::map<std::string, std::string>>& members) {
  if (members.empty()) throw InvalidModel("a stage needs at least one member");
  const EventTree& tree = st.tree();
  std::vector<std::string> slots;
  std::map<NodeId, std::map<std::string, std::string>> resolved;
  for (const auto& [v, given] : members) {
    if (!tree.contains(v)) throw UnknownNode("unknown vertex '" + v + "'");
    auto edges = tree.out_edges(v);
    if (edges.empty()) throw LeafStaging("leaf '" + v + "' cannot be staged");
    auto corr = given;
    if (corr.empty())
      for (const auto* e : edges) corr[e->label] = e->label;
    if (slots.empty())
      for (const auto* e : edges) {
        auto it = corr.find(e->label);
        if (it == corr.end()) throw FloretMismatch("no correspondence for edge '" + e->label + "' of '" + v + "'");
        slots.push_back(it->second);
      }
    std::set<std::string> slot_set(slots.begin(), slots.end()), image;
    if (edges.size() != slots.size() || corr.size() != edges.size())
      throw FloretMismatch("floret of '" + v + "' has " + std::to_string(edges.size()) + " edges, stage has " +
                           std::to_string(slots.size()));
    for (const auto* e : edges) {
      auto it = corr.find(e->label);
      if (it == corr.end() || !slot_set.count(it->second))
        throw FloretMismatch("edge '" + e->label + "' of '" + v + "' has no counterpart in the stage");
      image.insert(it->second);
    }
    if (image.size() != slot_set.size() || slot_set.size() != slots.size())
      throw FloretMismatch("correspondence for '" + v + "' is not a bijection");
    resolved[v] = std::move(corr);
  }

  std::vector<Stage> stages;
  for (const auto& [id, s] : st.stages()) {
    if (id == stage_id) throw InvalidModel("stage id '" + stage_id + "' is already in use");
    Stage kept = s;
    for (const auto& [v, _] : resolved) kept.members.erase(v);
    if (!kept.members.empty()) stages.push_back(std::move(kept));
  }
  stages.push_back(Stage{stage_id, slots, resolved});
  StageProbabilities probs;
  for (const auto& s : stages) {
    auto it = st.probabilities().find(s.id);
    if (it != st.probabilities().end()) probs[s.id] = it->second;
  }
  return StagedTree(tree, std::move(stages), std::move(probs));
}

// ---------------------------------------------------------------------------
// Chain event graphs
// ---------------------------------------------------------------------------

struct CegEdge {
  NodeId tail;
  NodeId head;
  std::string label;
  double probability = 1.0;
  bool evidence = false;
  std::vector<std::string> items;

  bool operator==(const CegEdge&) const = default;
};

struct Position {
  NodeId id;
  std::string stage;            // colour; empty for the sink
  std::vector<NodeId> members;  // staged-tree vertices merged into this position

  bool operator==(const Position&) const = default;
};

struct CegPath {
  std::vector<std::size_t> edges;  // indices into Ceg::edges()
  std::vector<NodeId> positions;
  std::vector<std::string> labels;
  double probability = 1.0;
};

class Ceg {
 public:
  Ceg() = default;

  Ceg(NodeId root, NodeId sink, std::vector<Position> positions, std::vector<CegEdge> edges)
      : root_(std::move(root)), sink_(std::move(sink)), positions_(std::move(positions)), edges_(std::move(edges)) {
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      if (!index_.emplace(positions_[i].id, i).second)
        throw InvalidModel("duplicate position '" + positions_[i].id + "'");
      out_[positions_[i].id];
    }
    if (!index_.count(root_)) throw InvalidModel("root '" + root_ + "' is not a position");
    if (!index_.count(sink_)) throw InvalidModel("sink '" + sink_ + "' is not a position");
    std::set<Edge> arrows;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      if (!index_.count(e.tail) || !index_.count(e.head))
        throw InvalidModel("edge '" + e.tail + "' -> '" + e.head + "' names an unknown position");
      if (!(e.probability > 0.0) || e.probability > 1.0 + kStageSumTolerance)
        throw InvalidModel("edge '" + e.label + "' out of '" + e.tail +
                           "' must have probability in (0, 1]; omit impossible edges");
      out_[e.tail].push_back(i);
      arrows.insert({e.tail, e.head});
    }
    auto ids = position_ids();
    Dag dag(NodeSet(ids.begin(), ids.end()), std::vector<Edge>(arrows.begin(), arrows.end()));
    for (auto& [v, out] : out_) {
      std::sort(out.begin(), out.end(), [&](auto a, auto b) { return edges_[a].label < edges_[b].label; });
      double sum = 0.0;
      for (std::size_t k = 0; k < out.size(); ++k) {
        if (k && edges_[out[k]].label == edges_[out[k - 1]].label)
          throw DuplicateSiblingLabel("position '" + v + "' has two edges labelled '" + edges_[out[k]].label + "'");
        sum += edges_[out[k]].probability;
      }
      if (v == sink_) {
        if (!out.empty()) throw InvalidModel("the sink has outgoing edges");
      } else if (out.empty()) {
        throw InvalidModel("position '" + v + "' has no outgoing edges");
      } else if (std::abs(sum - 1.0) > kStageSumTolerance) {
        throw InvalidModel("outgoing probabilities of '" + v + "' do not sum to 1");
      }
    }
    NodeSet from_root = dag.descendants(root_);
    from_root.insert(root_);
    for (const auto& p : positions_)
      if (!from_root.count(p.id) || !dag.reaches(p.id, sink_))
        throw InvalidModel("position '" + p.id + "' is not on a root-to-sink path");
  }

  const NodeId& root() const { return root_; }
  const NodeId& sink() const { return sink_; }
  const std::vector<Position>& positions() const { return positions_; }
  const std::vector<CegEdge>& edges() const { return edges_; }
  bool contains(const NodeId& p) const { return index_.count(p) > 0; }

  const Position& position(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownNode("unknown position '" + id + "'");
    return positions_[it->second];
  }

  // Outgoing edge indices in label order.
  const std::vector<std::size_t>& out_edges(const NodeId& p) const {
    auto it = out_.find(p);
    if (it == out_.end()) throw UnknownNode("unknown position '" + p + "'");
    return it->second;
  }

  bool operator==(const Ceg& other) const {
    return root_ == other.root_ && sink_ == other.sink_ && positions_ == other.positions_ && edges_ == other.edges_;
  }

 private:
  std::vector<NodeId> position_ids() const {
    std::vector<NodeId> out;
    for (const auto& p : positions_) out.push_back(p.id);
    return out;
  }

  NodeId root_;
  NodeId sink_;
  std::vector<Position> positions_;
  std::vector<CegEdge> edges_;
  std::map<NodeId, std::size_t> index_;
  std::map<NodeId, std::vector<std::size_t>> out_;
};

inline const NodeId kRootPosition = "w0";
inline const NodeId kSinkPosition = "w_inf";

namespace detail {

// Generic rooted tree to be collapsed into a CEG: each node carries an
// identity key (stage colour), and merging is by bottom-up signature.
struct UnfoldedNode {
  std::string colour;
  std::vector<NodeId> members;
  struct Out {
    std::string label;
    std::size_t child;
    double probability;
    bool evidence;
    std::vector<std::string> items;
  };
  std::vector<Out> out;  // sorted by label
};

// Merges nodes whose subtrees are identical in colour and labelled
// structure; all leaves fuse into the sink. Positions are named in
// breadth-first label order from the root.
inline Ceg collapse(const std::vector<UnfoldedNode>& nodes, std::size_t root) {
  // Post-order over the tree.
  std::vector<std::size_t> order{root};
  for (std::size_t i = 0; i < order.size(); ++i)
    for (const auto& o : nodes[order[i]].out) order.push_back(o.child);

  using Signature = std::tuple<std::string, std::vector<std::tuple<std::string, bool, std::size_t>>>;
  std::map<Signature, std::size_t> interned;
  std::vector<std::size_t> klass(nodes.size(), 0);  // 0 is the sink class
  std::vector<std::size_t> representative{static_cast<std::size_t>(-1)};
  std::vector<std::vector<NodeId>> members(1);
  for (std::size_t i = order.size(); i-- > 0;) {
    std::size_t n = order[i];
    const auto& node = nodes[n];
    if (node.out.empty()) {
      klass[n] = 0;
      members[0].insert(members[0].end(), node.members.begin(), node.members.end());
      continue;
    }
    Signature sig{node.colour, {}};
    for (const auto& o : node.out) std::get<1>(sig).emplace_back(o.label, o.evidence, klass[o.child]);
    auto [it, fresh] = interned.emplace(sig, representative.size());
    if (fresh) {
      representative.push_back(n);
      members.emplace_back();
    }
    klass[n] = it->second;
    auto& m = members[it->second];
    m.insert(m.end(), node.members.begin(), node.members.end());
  }

  // Name classes breadth-first from the root class.
  std::map<std::size_t, NodeId> name;
  std::vector<std::size_t> queue{klass[root]};
  std::set<std::size_t> seen{klass[root], 0};
  std::size_t counter = 0;
  name[klass[root]] = klass[root] == 0 ? kSinkPosition : kRootPosition;
  if (klass[root] != 0) ++counter;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    std::size_t k = queue[i];
    if (k == 0) continue;
    for (const auto& o : nodes[representative[k]].out) {
      std::size_t c = klass[o.child];
      if (seen.insert(c).second) {
        name[c] = "w" + std::to_string(counter++);
        queue.push_back(c);
      }
    }
  }
  name[0] = kSinkPosition;

  std::vector<Position> positions;
  std::vector<CegEdge> edges;
  for (std::size_t k : queue) {
    if (k == 0) continue;
    auto m = members[k];
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    positions.push_back({name[k], nodes[representative[k]].colour, m});
    for (const auto& o : nodes[representative[k]].out)
      edges.push_back({name[k], name[klass[o.child]], o.label, o.probability, o.evidence, o.items});
  }
  auto sink_members = members[0];
  std::sort(sink_members.begin(), sink_members.end());
  sink_members.erase(std::unique(sink_members.begin(), sink_members.end()), sink_members.end());
  positions.push_back({kSinkPosition, "", sink_members});
  if (klass[root] == 0) throw InvalidModel("a CEG needs at least one edge");
  return Ceg(kRootPosition, kSinkPosition, std::move(positions), std::move(edges));
}

inline void throw_for(const Finding& f) {
  if (f.code == "floret-mismatch") throw FloretMismatch(f.subject + ": " + f.message);
  if (f.code == "leaf-staging") throw LeafStaging(f.subject + ": " + f.message);
  if (f.code == "missing-probability") throw UnassignedStageProbability(f.subject + ": " + f.message);
  throw InvalidModel(f.subject + ": " + f.message);
}

}  // namespace detail

// Merges colour-isomorphic subtrees into positions and fuses leaves into the
// sink.
inline Ceg to_ceg(const StagedTree& st) {
  auto report = validate_staging(st);
  // Missing probabilities are the most specific failure; report them first.
  for (const auto& f : report)
    if (f.code == "floret-mismatch" || f.code == "leaf-staging") detail::throw_for(f);
  if (!report.empty()) detail::throw_for(report.front());

  const EventTree& tree = st.tree();
  std::vector<NodeId> order = tree.bfs_order();
  std::map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = i;
  std::vector<detail::UnfoldedNode> nodes(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const NodeId& v = order[i];
    auto& node = nodes[i];
    node.members = {v};
    auto edges = tree.out_edges(v);
    if (edges.empty()) continue;
    node.colour = st.stage_of(v);
    for (const auto* e : edges)
      node.out.push_back({st.slot(v, e->label), index[e->head], st.edge_probability(*e), e->evidence, e->items});
    std::sort(node.out.begin(), node.out.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  }
  return detail::collapse(nodes, 0);
}

inline std::vector<CegPath> enumerate_paths(const Ceg& c) {
  std::vector<CegPath> out;
  CegPath current;
  current.positions.push_back(c.root());
  std::function<void(const NodeId&, double)> walk = [&](const NodeId& p, double prob) {
    if (p == c.sink()) {
      CegPath done = current;
      done.probability = prob;
      out.push_back(std::move(done));
      return;
    }
    for (auto i : c.out_edges(p)) {
      const auto& e = c.edges()[i];
      current.edges.push_back(i);
      current.positions.push_back(e.head);
      current.labels.push_back(e.label);
      walk(e.head, prob * e.probability);
      current.edges.pop_back();
      current.positions.pop_back();
      current.labels.pop_back();
    }
  };
  walk(c.root(), 1.0);
  return out;
}

using PathPredicate = std::function<bool(const CegPath&)>;

// Keeps only the paths satisfying `keep`; surviving edge probabilities are
// the original ones renormalized over the kept continuations.
inline Ceg condition(const Ceg& c, const PathPredicate& keep) {
  auto paths = enumerate_paths(c);
  std::vector<const CegPath*> kept;
  double mass = 0.0;
  for (const auto& p : paths)
    if (keep(p)) {
      kept.push_back(&p);
      mass += p.probability;
    }
  if (kept.empty() || mass < kNoSurvivingMass) throw NoSurvivingPath("no path with positive probability survives");

  // Prefix trie of the kept paths.
  struct TrieNode {
    NodeId position;
    std::map<std::string, std::pair<std::size_t, std::size_t>> out;  // label -> (edge, child)
  };
  std::vector<TrieNode> trie{{c.root(), {}}};
  for (const auto* p : kept) {
    std::size_t at = 0;
    for (auto ei : p->edges) {
      const auto& e = c.edges()[ei];
      auto it = trie[at].out.find(e.label);
      if (it == trie[at].out.end()) {
        trie.push_back({e.head, {}});
        it = trie[at].out.emplace(e.label, std::make_pair(ei, trie.size() - 1)).first;
      }
      at = it->second.second;
    }
  }
  // Kept mass below each trie node; children have larger indices.
  std::vector<double> below(trie.size(), 1.0);
  for (std::size_t i = trie.size(); i-- > 0;) {
    if (trie[i].out.empty()) continue;
    double s = 0.0;
    for (const auto& [label, ec] : trie[i].out) s += c.edges()[ec.first].probability * below[ec.second];
    below[i] = s;
  }
  std::vector<detail::UnfoldedNode> nodes(trie.size());
  for (std::size_t i = 0; i < trie.size(); ++i) {
    const Position& pos = c.position(trie[i].position);
    nodes[i].colour = trie[i].position + "\x1f" + pos.stage;
    nodes[i].members = pos.members;
    for (const auto& [label, ec] : trie[i].out) {
      const auto& e = c.edges()[ec.first];
      nodes[i].out.push_back({label, ec.second, e.probability * below[ec.second] / below[i], e.evidence, e.items});
    }
  }
  Ceg merged = detail::collapse(nodes, 0);
  // Colours carried the source position to keep distinct positions apart;
  // restore the plain stage colour.
  std::vector<Position> positions = merged.positions();
  for (auto& p : positions) {
    auto bar = p.stage.find('\x1f');
    if (bar != std::string::npos) p.stage = p.stage.substr(bar + 1);
  }
  return Ceg(merged.root(), merged.sink(), std::move(positions), merged.edges());
}

// Path predicate built from label and position constraints.
struct PathFilter {
  std::vector<std::string> require_labels;  // every one must appear on the path
  std::vector<std::string> exclude_labels;  // none may appear
  std::vector<NodeId> through_positions;    // every one must be visited

  bool operator()(const CegPath& p) const {
    auto has_label = [&](const std::string& l) { return std::find(p.labels.begin(), p.labels.end(), l) != p.labels.end(); };
    for (const auto& l : require_labels)
      if (!has_label(l)) return false;
    for (const auto& l : exclude_labels)
      if (has_label(l)) return false;
    for (const auto& w : through_positions)
      if (std::find(p.positions.begin(), p.positions.end(), w) == p.positions.end()) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Cuts
// ---------------------------------------------------------------------------

struct CutValue {
  NodeId position;
  double probability = 0.0;
  std::size_t paths = 0;
};

struct CutVariable {
  std::string name;
  std::vector<CutValue> values;
};

// A variable whose values are the cut positions; each value's probability is
// the mass of the paths through it.
inline CutVariable cut_variable(const Ceg& c, const std::set<NodeId>& cut, const std::string& name = "cut") {
  if (cut.empty()) throw NotACut("a cut needs at least one position");
  for (const auto& w : cut) c.position(w);
  std::map<NodeId, CutValue> values;
  for (const auto& w : cut) values[w] = {w, 0.0, 0};
  for (const auto& p : enumerate_paths(c)) {
    const NodeId* hit = nullptr;
    std::size_t crossings = 0;
    for (const auto& w : p.positions)
      if (cut.count(w)) {
        ++crossings;
        hit = &w;
      }
    if (crossings != 1) {
      std::string path;
      for (const auto& l : p.labels) path += (path.empty() ? "" : " > ") + l;
      throw NotACut("path [" + path + "] crosses the cut " + std::to_string(crossings) + " times");
    }
    values[*hit].probability += p.probability;
    ++values[*hit].paths;
  }
  CutVariable out{name, {}};
  for (auto& [_, v] : values) out.values.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------
// Bayesian network to staged tree
// ---------------------------------------------------------------------------

inline std::string state_label(const NodeId& node, const std::string& state) { return node + "=" + state; }

// Unfolds the network variable by variable along `order` (topological by
// default). Vertices for the same variable share a stage exactly when their
// conditional rows are identical. Zero-probability branches are omitted.
inline StagedTree bn_to_ceg(const DiscreteBayesNet& net, std::optional<std::vector<NodeId>> order = std::nullopt,
                            std::size_t cap = kDefaultJointCap) {
  require_valid(net);
  std::vector<NodeId> vars = order ? *order : topological_order(net.dag());
  if (vars.size() != net.dag().size() || NodeSet(vars.begin(), vars.end()) != net.dag().nodes())
    throw InvalidOrder("order must list every node exactly once");
  std::map<NodeId, std::size_t> depth;
  for (std::size_t i = 0; i < vars.size(); ++i) depth[vars[i]] = i;
  for (const auto& e : net.dag().edges())
    if (depth[e.tail] > depth[e.head]) throw InvalidOrder("'" + e.tail + "' must come before '" + e.head + "'");
  std::size_t total = 1;
  for (const auto& v : vars) {
    if (total > cap / net.cardinality(v)) throw TooLarge("unfolded tree exceeds the cap of " + std::to_string(cap));
    total *= net.cardinality(v);
  }

  struct Frontier {
    NodeId vertex;
    std::map<NodeId, std::size_t> assignment;
  };
  std::vector<NodeId> vertices;
  std::vector<TreeEdge> edges;
  std::map<std::pair<std::size_t, std::vector<double>>, std::string> stage_ids;
  std::map<std::string, Stage> stages;
  StageProbabilities probs;
  std::size_t counter = 0;
  std::vector<Frontier> level{{"v" + std::to_string(counter++), {}}};
  vertices.push_back(level.front().vertex);

  for (std::size_t d = 0; d < vars.size(); ++d) {
    const NodeId& var = vars[d];
    const Cpt& cpt = net.cpt(var);
    const StateSpace& space = net.space(var);
    std::vector<Frontier> next;
    for (auto& f : level) {
      std::vector<std::size_t> parent_states;
      for (const auto& p : cpt.parents) parent_states.push_back(f.assignment.at(p));
      const auto& row = cpt.rows[net.row_index(var, parent_states)];
      auto key = std::make_pair(d, row);
      auto it = stage_ids.find(key);
      if (it == stage_ids.end()) {
        std::string sid = var + "#" + std::to_string(stage_ids.size());
        it = stage_ids.emplace(key, sid).first;
        Stage s{sid, {}, {}};
        for (std::size_t k = 0; k < row.size(); ++k)
          if (row[k] > 0.0) {
            s.labels.push_back(state_label(var, space.states[k]));
            probs[sid][state_label(var, space.states[k])] = row[k];
          }
        stages.emplace(sid, std::move(s));
      }
      auto& members = stages[it->second].members[f.vertex];
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (!(row[k] > 0.0)) continue;
        std::string label = state_label(var, space.states[k]);
        members[label] = label;
        Frontier child{"v" + std::to_string(counter++), f.assignment};
        child.assignment[var] = k;
        vertices.push_back(child.vertex);
        edges.push_back({f.vertex, child.vertex, label, false, {}});
        next.push_back(std::move(child));
      }
    }
    level = std::move(next);
  }
  std::vector<Stage> stage_list;
  for (auto& [_, s] : stages) stage_list.push_back(std::move(s));
  return StagedTree(EventTree(vertices, std::move(edges)), std::move(stage_list), std::move(probs));
}

}  // namespace evidentia
