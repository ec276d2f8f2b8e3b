#pragma once

#include <string>
#include <vector>

#include "evidentia/bn.hpp"
#include "evidentia/io/common.hpp"
#include "evidentia/junction_tree.hpp"

namespace evidentia::io {

inline StateSpace state_space_from_json(const json& j, const std::string& what) {
  expect_keys(j, what, {"id", "states"}, {"constant"});
  return StateSpace{get<std::string>(j, "id", what), get<std::vector<std::string>>(j, "states", what),
                    get_or<bool>(j, "constant", false, what)};
}

inline json to_json(const StateSpace& s) {
  json j = {{"id", s.node}, {"states", s.states}};
  if (s.constant) j["constant"] = true;
  return j;
}

inline Edge edge_from_json(const json& j, const std::string& what) {
  expect_keys(j, what, {"tail", "head"});
  return Edge{get<std::string>(j, "tail", what), get<std::string>(j, "head", what)};
}

inline Cpt cpt_from_json(const json& j, const std::string& what) {
  expect_keys(j, what, {"node", "parents", "rows"});
  return Cpt{get<std::string>(j, "node", what), get<std::vector<std::string>>(j, "parents", what),
             get<std::vector<std::vector<double>>>(j, "rows", what)};
}

inline json to_json(const Cpt& c) { return {{"node", c.node}, {"parents", c.parents}, {"rows", c.rows}}; }

// Network document: `nodes`, `edges`, `cpts`. Structural errors in the graph
// (cycles, unknown endpoints) throw; table problems are left to `validate`.
inline DiscreteBayesNet bn_from_json(const json& j) {
  const std::string what = "network";
  expect_keys(j, what, {"nodes", "edges", "cpts"}, {"format_version", "metadata"});
  check_version(j, what);
  std::vector<StateSpace> spaces;
  NodeSet ids;
  for (const auto& n : array_at(j, "nodes", what)) {
    spaces.push_back(state_space_from_json(n, what + " node"));
    if (!ids.insert(spaces.back().node).second) throw ParseError(what + ": duplicate node '" + spaces.back().node + "'");
  }
  std::vector<Edge> edges;
  for (const auto& e : array_at(j, "edges", what)) edges.push_back(edge_from_json(e, what + " edge"));
  std::vector<Cpt> cpts;
  for (const auto& c : array_at(j, "cpts", what)) cpts.push_back(cpt_from_json(c, what + " cpt"));
  return DiscreteBayesNet(Dag(ids, edges), spaces, cpts);
}

inline json to_json(const DiscreteBayesNet& net) {
  json nodes = json::array(), edges = json::array(), cpts = json::array();
  for (const auto& [_, s] : net.spaces()) nodes.push_back(to_json(s));
  for (const auto& e : net.dag().edges()) edges.push_back({{"tail", e.tail}, {"head", e.head}});
  for (const auto& [_, c] : net.cpts()) cpts.push_back(to_json(c));
  return {{"format_version", kFormatVersion}, {"nodes", nodes}, {"edges", edges}, {"cpts", cpts}};
}

inline EvidenceSet evidence_from_json(const json& j) {
  const std::string what = "evidence";
  expect_keys(j, what, {}, {"hard", "soft", "format_version"});
  check_version(j, what);
  EvidenceSet ev;
  ev.hard = get_or<std::map<NodeId, std::string>>(j, "hard", {}, what);
  for (const auto& [node, weights] : get_or<std::map<NodeId, std::vector<double>>>(j, "soft", {}, what))
    ev = apply_soft_evidence(std::move(ev), node, weights);
  return ev;
}

inline json to_json(const EvidenceSet& ev) {
  return {{"hard", json(ev.hard)}, {"soft", json(ev.soft)}};
}

// Marginals keyed by state label, so the report reads without the model.
inline json to_json(const PosteriorReport& r, const DiscreteBayesNet& net, const std::vector<NodeId>& only = {}) {
  json marginals = json::object();
  for (const auto& [node, probs] : r.marginals) {
    if (!only.empty() && std::find(only.begin(), only.end(), node) == only.end()) continue;
    json m = json::object();
    const auto& states = net.space(node).states;
    for (std::size_t i = 0; i < probs.size(); ++i) m[states[i]] = probs[i];
    marginals[node] = m;
  }
  return {{"evidence_probability", r.evidence_probability}, {"marginals", marginals}};
}

}  // namespace evidentia::io
