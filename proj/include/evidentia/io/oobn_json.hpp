#pragma once

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "evidentia/io/bn_json.hpp"
#include "evidentia/oobn.hpp"

namespace evidentia::io {

inline Network network_body_from_json(const json& j, const std::string& what) {
  expect_keys(j, what, {}, {"nodes", "edges", "cpts", "instances"});
  Network n;
  if (j.contains("nodes"))
    for (const auto& s : array_at(j, "nodes", what)) n.nodes.push_back(state_space_from_json(s, what + " node"));
  if (j.contains("edges"))
    for (const auto& e : array_at(j, "edges", what)) n.edges.push_back(edge_from_json(e, what + " edge"));
  if (j.contains("cpts"))
    for (const auto& c : array_at(j, "cpts", what)) n.cpts.push_back(cpt_from_json(c, what + " cpt"));
  if (j.contains("instances"))
    for (const auto& i : array_at(j, "instances", what)) {
      expect_keys(i, "instance", {"name", "class"}, {"bindings"});
      n.instances.push_back({get<std::string>(i, "name", "instance"), get<std::string>(i, "class", "instance"),
                             get_or<std::map<NodeId, NodeId>>(i, "bindings", {}, "instance")});
    }
  return n;
}

inline json to_json(const Network& n) {
  json nodes = json::array(), edges = json::array(), cpts = json::array(), instances = json::array();
  for (const auto& s : n.nodes) nodes.push_back(to_json(s));
  for (const auto& e : n.edges) edges.push_back({{"tail", e.tail}, {"head", e.head}});
  for (const auto& c : n.cpts) cpts.push_back(to_json(c));
  for (const auto& i : n.instances)
    instances.push_back({{"name", i.name}, {"class", i.class_name}, {"bindings", json(i.bindings)}});
  return {{"nodes", nodes}, {"edges", edges}, {"cpts", cpts}, {"instances", instances}};
}

// Classes may appear in any order; they are registered so that every class
// is defined after the classes it instantiates.
inline OobnModel oobn_from_json(const json& j) {
  const std::string what = "oobn";
  expect_keys(j, what, {"classes", "top"}, {"format_version", "metadata"});
  check_version(j, what);
  std::map<std::string, NetworkClass> pending;
  for (const auto& c : array_at(j, "classes", what)) {
    expect_keys(c, "class", {"name"}, {"inputs", "outputs", "nodes", "edges", "cpts", "instances"});
    NetworkClass cls;
    cls.name = get<std::string>(c, "name", "class");
    if (c.contains("inputs"))
      for (const auto& s : array_at(c, "inputs", "class")) cls.inputs.push_back(state_space_from_json(s, "class input"));
    cls.outputs = get_or<std::vector<NodeId>>(c, "outputs", {}, "class");
    json body = json::object();
    for (const char* k : {"nodes", "edges", "cpts", "instances"})
      if (c.contains(k)) body[k] = c[k];
    cls.body = network_body_from_json(body, "class '" + cls.name + "'");
    std::string name = cls.name;
    if (!pending.emplace(name, std::move(cls)).second) throw DuplicateClass("class '" + name + "' is defined twice");
  }

  OobnModel model;
  std::set<std::string> visiting;
  std::function<void(const std::string&)> define = [&](const std::string& name) {
    if (model.has_class(name)) return;
    auto it = pending.find(name);
    if (it == pending.end()) throw UnknownClass("unknown class '" + name + "'");
    if (!visiting.insert(name).second) throw ClassCycle("class '" + name + "' instantiates itself through nesting");
    for (const auto& inst : it->second.body.instances)
      if (inst.class_name != name) define(inst.class_name);
    model = model.with_class(it->second);
    visiting.erase(name);
  };
  for (const auto& [name, _] : pending) define(name);
  return model.with_top(network_body_from_json(j.at("top"), "top"));
}

inline json to_json(const OobnModel& m) {
  json classes = json::array();
  for (const auto& [_, cls] : m.classes()) {
    json c = to_json(cls->body);
    c["name"] = cls->name;
    json inputs = json::array();
    for (const auto& s : cls->inputs) inputs.push_back(to_json(s));
    c["inputs"] = inputs;
    c["outputs"] = cls->outputs;
    classes.push_back(c);
  }
  return {{"format_version", kFormatVersion}, {"classes", classes}, {"top", to_json(m.top())}};
}

}  // namespace evidentia::io
