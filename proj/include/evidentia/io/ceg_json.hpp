#pragma once

#include <string>
#include <vector>

#include "evidentia/ceg.hpp"
#include "evidentia/io/common.hpp"

namespace evidentia::io {

inline TreeEdge tree_edge_from_json(const json& j) {
  const std::string what = "tree edge";
  expect_keys(j, what, {"tail", "head", "label"}, {"evidence", "items"});
  return TreeEdge{get<std::string>(j, "tail", what), get<std::string>(j, "head", what),
                  get<std::string>(j, "label", what), get_or<bool>(j, "evidence", false, what),
                  get_or<std::vector<std::string>>(j, "items", {}, what)};
}

inline json edge_extras(json j, bool evidence, const std::vector<std::string>& items) {
  if (evidence) j["evidence"] = true;
  if (!items.empty()) j["items"] = items;
  return j;
}

inline Stage stage_from_json(const json& j) {
  const std::string what = "stage";
  expect_keys(j, what, {"id", "members"}, {"labels"});
  Stage s;
  s.id = get<std::string>(j, "id", what);
  s.labels = get_or<std::vector<std::string>>(j, "labels", {}, what);
  const json& members = j.at("members");
  if (members.is_array()) {
    for (const auto& v : members) {
      if (!v.is_string()) throw ParseError(what + " '" + s.id + "': member ids must be strings");
      s.members[v.get<std::string>()];
    }
  } else {
    s.members = get<std::map<NodeId, std::map<std::string, std::string>>>(j, "members", what);
  }
  return s;
}

inline json to_json(const Stage& s) {
  return {{"id", s.id}, {"labels", s.labels}, {"members", json(s.members)}};
}

// Staged tree document: `vertices`, `edges`, optional `stages` and
// `stage_probabilities`. Stage members may be a list of ids (labels map to
// themselves) or an object of per-member label correspondences.
inline StagedTree staged_tree_from_json(const json& j) {
  const std::string what = "staged tree";
  expect_keys(j, what, {"vertices", "edges"}, {"format_version", "stages", "stage_probabilities", "metadata"});
  check_version(j, what);
  auto vertices = get<std::vector<NodeId>>(j, "vertices", what);
  std::vector<TreeEdge> edges;
  for (const auto& e : array_at(j, "edges", what)) edges.push_back(tree_edge_from_json(e));
  std::vector<Stage> stages;
  if (j.contains("stages"))
    for (const auto& s : array_at(j, "stages", what)) stages.push_back(stage_from_json(s));
  auto probs = get_or<StageProbabilities>(j, "stage_probabilities", {}, what);
  return StagedTree(EventTree(vertices, std::move(edges)), std::move(stages), std::move(probs));
}

inline json to_json(const StagedTree& st) {
  json edges = json::array(), stages = json::array();
  for (const auto& e : st.tree().edges())
    edges.push_back(edge_extras({{"tail", e.tail}, {"head", e.head}, {"label", e.label}}, e.evidence, e.items));
  for (const auto& [_, s] : st.stages()) stages.push_back(to_json(s));
  return {{"format_version", kFormatVersion},
          {"vertices", st.tree().vertices()},
          {"edges", edges},
          {"stages", stages},
          {"stage_probabilities", json(st.probabilities())}};
}

inline Ceg ceg_from_json(const json& j) {
  const std::string what = "ceg";
  expect_keys(j, what, {"root", "sink", "positions", "edges"}, {"format_version", "metadata"});
  check_version(j, what);
  std::vector<Position> positions;
  for (const auto& p : array_at(j, "positions", what)) {
    expect_keys(p, "position", {"id"}, {"stage", "members"});
    positions.push_back({get<std::string>(p, "id", "position"), get_or<std::string>(p, "stage", "", "position"),
                         get_or<std::vector<NodeId>>(p, "members", {}, "position")});
  }
  std::vector<CegEdge> edges;
  for (const auto& e : array_at(j, "edges", what)) {
    const std::string we = "ceg edge";
    expect_keys(e, we, {"tail", "head", "label", "probability"}, {"evidence", "items"});
    edges.push_back({get<std::string>(e, "tail", we), get<std::string>(e, "head", we), get<std::string>(e, "label", we),
                     get<double>(e, "probability", we), get_or<bool>(e, "evidence", false, we),
                     get_or<std::vector<std::string>>(e, "items", {}, we)});
  }
  return Ceg(get<std::string>(j, "root", what), get<std::string>(j, "sink", what), std::move(positions),
             std::move(edges));
}

inline json to_json(const Ceg& c) {
  json positions = json::array(), edges = json::array();
  for (const auto& p : c.positions()) positions.push_back({{"id", p.id}, {"stage", p.stage}, {"members", p.members}});
  for (const auto& e : c.edges())
    edges.push_back(edge_extras(
        {{"tail", e.tail}, {"head", e.head}, {"label", e.label}, {"probability", e.probability}}, e.evidence, e.items));
  return {{"format_version", kFormatVersion},
          {"root", c.root()},
          {"sink", c.sink()},
          {"positions", positions},
          {"edges", edges}};
}

inline json to_json(const CegPath& p, const Ceg& c) {
  json items = json::array();
  bool evidence = false;
  for (auto ei : p.edges) {
    for (const auto& it : c.edges()[ei].items) items.push_back(it);
    evidence = evidence || c.edges()[ei].evidence;
  }
  return {{"positions", p.positions}, {"labels", p.labels}, {"probability", p.probability},
          {"items", items}, {"has_evidence", evidence}};
}

inline PathFilter path_filter_from_json(const json& j) {
  const std::string what = "path filter";
  expect_keys(j, what, {}, {"require", "exclude", "through"});
  return PathFilter{get_or<std::vector<std::string>>(j, "require", {}, what),
                    get_or<std::vector<std::string>>(j, "exclude", {}, what),
                    get_or<std::vector<NodeId>>(j, "through", {}, what)};
}

}  // namespace evidentia::io
