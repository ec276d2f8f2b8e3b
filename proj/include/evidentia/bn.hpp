#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evidentia/error.hpp"
#include "evidentia/graph.hpp"

namespace evidentia {

// Rows whose sum is off by at most this much are renormalized at load time.
inline constexpr double kRenormalizeTolerance = 1e-6;

struct StateSpace {
  NodeId node;
  std::vector<std::string> states;
  bool constant = false;  // a constant node may have a single state

  std::size_t size() const { return states.size(); }

  std::optional<std::size_t> index_of(const std::string& label) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i] == label) return i;
    return std::nullopt;
  }

  std::size_t require_index(const std::string& label) const {
    auto i = index_of(label);
    if (!i) throw UnknownState("node '" + node + "' has no state '" + label + "'");
    return *i;
  }

  bool same_states(const StateSpace& other) const { return states == other.states; }

  bool operator==(const StateSpace&) const = default;
};

// Conditional probability table. Rows are indexed by parent configuration in
// row-major order: the first declared parent varies slowest.
struct Cpt {
  NodeId node;
  std::vector<NodeId> parents;
  std::vector<std::vector<double>> rows;

  bool operator==(const Cpt&) const = default;
};

class DiscreteBayesNet {
 public:
  DiscreteBayesNet() = default;

  // Stores the model as given; near-normalized rows are renormalized and any
  // remaining problems are left for `validate` to report.
  DiscreteBayesNet(Dag dag, const std::vector<StateSpace>& spaces, const std::vector<Cpt>& cpts)
      : dag_(std::move(dag)) {
    for (const auto& s : spaces) {
      if (!spaces_.emplace(s.node, s).second)
        duplicates_.push_back("state space for '" + s.node + "'");
    }
    for (auto c : cpts) {
      for (auto& row : c.rows) renormalize(row);
      NodeId id = c.node;
      if (!cpts_.emplace(id, std::move(c)).second) duplicates_.push_back("cpt for '" + id + "'");
    }
  }

  const Dag& dag() const { return dag_; }
  const std::map<NodeId, StateSpace>& spaces() const { return spaces_; }
  const std::map<NodeId, Cpt>& cpts() const { return cpts_; }
  const std::vector<std::string>& duplicate_declarations() const { return duplicates_; }

  const StateSpace& space(const NodeId& v) const {
    auto it = spaces_.find(v);
    if (it == spaces_.end()) throw UnknownNode("no state space for node '" + v + "'");
    return it->second;
  }

  const Cpt& cpt(const NodeId& v) const {
    auto it = cpts_.find(v);
    if (it == cpts_.end()) throw UnknownNode("no cpt for node '" + v + "'");
    return it->second;
  }

  std::size_t cardinality(const NodeId& v) const { return space(v).size(); }

  // Row index of the CPT of `v` for the given parent state indices, listed in
  // the CPT's declared parent order.
  std::size_t row_index(const NodeId& v, const std::vector<std::size_t>& parent_states) const {
    const Cpt& c = cpt(v);
    std::size_t index = 0;
    for (std::size_t i = 0; i < c.parents.size(); ++i)
      index = index * cardinality(c.parents[i]) + parent_states[i];
    return index;
  }

  bool operator==(const DiscreteBayesNet& other) const {
    return dag_ == other.dag_ && spaces_ == other.spaces_ && cpts_ == other.cpts_;
  }

 private:
  static void renormalize(std::vector<double>& row) {
    double sum = 0.0;
    for (double p : row) sum += p;
    // Float noise below 1e-12 is left alone so that reloading is idempotent.
    double deviation = std::abs(sum - 1.0);
    if (sum > 0.0 && deviation > 1e-12 && deviation <= kRenormalizeTolerance)
      for (double& p : row) p /= sum;
  }

  Dag dag_;
  std::map<NodeId, StateSpace> spaces_;
  std::map<NodeId, Cpt> cpts_;
  std::vector<std::string> duplicates_;
};

inline std::string join_ids(const std::vector<NodeId>& ids) {
  std::string out = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  return out + "]";
}

inline ValidationReport validate(const DiscreteBayesNet& net) {
  ValidationReport report;
  auto add = [&](std::string code, std::string subject, std::string message) {
    report.push_back({std::move(code), std::move(subject), std::move(message)});
  };

  for (const auto& d : net.duplicate_declarations()) add("duplicate-declaration", d, "declared more than once");

  for (const auto& [id, space] : net.spaces()) {
    if (!net.dag().contains(id)) add("orphan-state-space", id, "state space for a node that is not in the graph");
    if (space.states.size() < 2 && !(space.constant && space.states.size() == 1))
      add("too-few-states", id, "a non-constant node needs at least two states");
    std::set<std::string> unique(space.states.begin(), space.states.end());
    if (unique.size() != space.states.size()) add("duplicate-state", id, "state labels must be unique");
  }
  for (const auto& [id, cpt] : net.cpts())
    if (!net.dag().contains(id)) add("orphan-cpt", id, "cpt for a node that is not in the graph");

  for (const auto& v : net.dag().nodes()) {
    bool has_space = net.spaces().count(v) > 0;
    bool has_cpt = net.cpts().count(v) > 0;
    if (!has_space) add("missing-state-space", v, "node has no state space");
    if (!has_cpt) add("missing-cpt", v, "node has no cpt");
    if (!has_space || !has_cpt) continue;

    const Cpt& cpt = net.cpt(v);
    const auto& dag_parents = net.dag().parents(v);
    NodeSet declared(cpt.parents.begin(), cpt.parents.end());
    if (declared != dag_parents || declared.size() != cpt.parents.size()) {
      add("parent-mismatch", v, "cpt parents " + join_ids(cpt.parents) + " do not match the graph parents");
      continue;
    }
    std::size_t expected_rows = 1;
    bool parents_known = true;
    for (const auto& p : cpt.parents) {
      if (!net.spaces().count(p)) {
        parents_known = false;
        break;
      }
      expected_rows *= net.cardinality(p);
    }
    if (!parents_known) continue;
    if (cpt.rows.size() != expected_rows) {
      add("dimension-mismatch", v,
          "expected " + std::to_string(expected_rows) + " rows, found " + std::to_string(cpt.rows.size()));
      continue;
    }
    for (std::size_t r = 0; r < cpt.rows.size(); ++r) {
      const auto& row = cpt.rows[r];
      std::string where = "row " + std::to_string(r);
      if (row.size() != net.cardinality(v)) {
        add("dimension-mismatch", v, where + " has " + std::to_string(row.size()) + " entries, expected " +
                                         std::to_string(net.cardinality(v)));
        continue;
      }
      double sum = 0.0;
      bool bad_entry = false;
      for (double p : row) {
        if (!std::isfinite(p) || p < 0.0) bad_entry = true;
        sum += p;
      }
      if (bad_entry) add("negative-entry", v, where + " has a negative or non-finite entry");
      if (std::abs(sum - 1.0) > kRenormalizeTolerance) {
        std::ostringstream msg;
        msg << where << " sums to " << sum;
        add("unnormalized-row", v, msg.str());
      }
    }
  }
  return report;
}

inline void require_valid(const DiscreteBayesNet& net) {
  auto report = validate(net);
  if (!report.empty())
    throw InvalidModel("network is invalid: " + report.front().subject + ": " + report.front().message);
}

// Hard evidence fixes a state; soft evidence is a likelihood vector.
struct EvidenceSet {
  std::map<NodeId, std::string> hard;
  std::map<NodeId, std::vector<double>> soft;

  bool empty() const { return hard.empty() && soft.empty(); }
  bool operator==(const EvidenceSet&) const = default;
};

inline void check_weights(const NodeId& node, const std::vector<double>& weights) {
  bool positive = false;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidWeights("soft evidence on '" + node + "' has a negative weight");
    if (w > 0.0) positive = true;
  }
  if (!positive) throw InvalidWeights("soft evidence on '" + node + "' needs a strictly positive weight");
}

inline EvidenceSet apply_soft_evidence(EvidenceSet ev, const NodeId& node, std::vector<double> weights) {
  if (ev.hard.count(node) || ev.soft.count(node))
    throw ConflictingEvidence("node '" + node + "' already carries evidence");
  check_weights(node, weights);
  ev.soft.emplace(node, std::move(weights));
  return ev;
}

// Checks the evidence against a network's node ids and state spaces.
inline void check_evidence(const DiscreteBayesNet& net, const EvidenceSet& ev) {
  for (const auto& [node, state] : ev.hard) {
    net.dag().require(node);
    net.space(node).require_index(state);
    if (ev.soft.count(node)) throw ConflictingEvidence("node '" + node + "' has both hard and soft evidence");
  }
  for (const auto& [node, weights] : ev.soft) {
    net.dag().require(node);
    check_weights(node, weights);
    if (weights.size() != net.cardinality(node))
      throw InvalidWeights("soft evidence on '" + node + "' has " + std::to_string(weights.size()) +
                           " weights for " + std::to_string(net.cardinality(node)) + " states");
  }
}

// Product of parent-conditional entries for a complete assignment.
inline double joint_probability(const DiscreteBayesNet& net, const std::map<NodeId, std::string>& assignment) {
  std::map<NodeId, std::size_t> index;
  for (const auto& v : net.dag().nodes()) {
    auto it = assignment.find(v);
    if (it == assignment.end()) throw IncompleteAssignment("assignment misses node '" + v + "'");
    index[v] = net.space(v).require_index(it->second);
  }
  for (const auto& [v, _] : assignment) net.dag().require(v);

  double p = 1.0;
  for (const auto& v : net.dag().nodes()) {
    const Cpt& c = net.cpt(v);
    std::vector<std::size_t> parent_states;
    for (const auto& pa : c.parents) parent_states.push_back(index.at(pa));
    p *= c.rows.at(net.row_index(v, parent_states)).at(index.at(v));
  }
  return p;
}

}  // namespace evidentia
