#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evidentia/bn.hpp"

namespace evidentia {

// Separator between instance names and node names in flattened ids.
inline constexpr char kPathSeparator = '.';

struct InstanceDecl {
  std::string name;
  std::string class_name;
  // input node name -> host node reference ("node" or "instance.output")
  std::map<NodeId, NodeId> bindings;

  bool operator==(const InstanceDecl&) const = default;
};

// A network body: basic nodes with tables, edges among them and nested
// instances. Used both for class bodies and for the top level.
struct Network {
  std::vector<StateSpace> nodes;
  std::vector<Edge> edges;
  std::vector<Cpt> cpts;
  std::vector<InstanceDecl> instances;

  bool operator==(const Network&) const = default;
};

struct NetworkClass {
  std::string name;
  std::vector<StateSpace> inputs;  // placeholders, no table
  std::vector<NodeId> outputs;     // exposed internal nodes
  Network body;

  bool operator==(const NetworkClass&) const = default;
};

class OobnModel;

namespace detail {

inline std::pair<std::string, std::string> split_ref(const NodeId& ref) {
  auto dot = ref.find(kPathSeparator);
  if (dot == NodeId::npos) return {std::string(), ref};
  return {ref.substr(0, dot), ref.substr(dot + 1)};
}

inline void require_plain_name(const std::string& name, const std::string& what) {
  if (name.empty()) throw InvalidModel(what + " names must be non-empty");
  if (name.find(kPathSeparator) != std::string::npos)
    throw InvalidModel(what + " name '" + name + "' must not contain '" + std::string(1, kPathSeparator) + "'");
}

}  // namespace detail

// Registry of immutable classes plus a top-level network. Every operation
// returns a new model; classes are shared between copies.
class OobnModel {
 public:
  OobnModel() = default;

  const std::map<std::string, std::shared_ptr<const NetworkClass>>& classes() const { return classes_; }
  const Network& top() const { return top_; }

  bool has_class(const std::string& name) const { return classes_.count(name) > 0; }

  const NetworkClass& find_class(const std::string& name) const {
    auto it = classes_.find(name);
    if (it == classes_.end()) throw UnknownClass("unknown class '" + name + "'");
    return *it->second;
  }

  OobnModel with_class(NetworkClass cls) const;
  OobnModel with_top(Network top) const;

  bool operator==(const OobnModel& other) const {
    if (!(top_ == other.top_) || classes_.size() != other.classes_.size()) return false;
    for (const auto& [name, cls] : classes_) {
      auto it = other.classes_.find(name);
      if (it == other.classes_.end() || !(*cls == *it->second)) return false;
    }
    return true;
  }

 private:
  friend OobnModel instantiate(const OobnModel&, const std::string&, const std::string&,
                               const std::map<NodeId, NodeId>&);

  std::map<std::string, std::shared_ptr<const NetworkClass>> classes_;
  Network top_;
};

namespace detail {

// Name resolution inside one network body.
class Scope {
 public:
  Scope(const OobnModel& registry, const Network& body, const std::vector<StateSpace>* inputs,
        const std::string* self_class)
      : registry_(registry), body_(body) {
    if (inputs)
      for (const auto& in : *inputs) {
        require_plain_name(in.node, "input node");
        if (!spaces_.emplace(in.node, &in).second) throw InvalidModel("duplicate node name '" + in.node + "'");
        inputs_.insert(in.node);
      }
    for (const auto& n : body.nodes) {
      require_plain_name(n.node, "node");
      if (!spaces_.emplace(n.node, &n).second) throw InvalidModel("duplicate node name '" + n.node + "'");
    }
    for (const auto& inst : body.instances) {
      require_plain_name(inst.name, "instance");
      if (spaces_.count(inst.name) || !instances_.emplace(inst.name, &inst).second)
        throw DuplicateInstance("duplicate instance name '" + inst.name + "'");
      if (self_class && inst.class_name == *self_class)
        throw ClassCycle("class '" + *self_class + "' contains an instance of itself");
      registry_.find_class(inst.class_name);
    }
  }

  bool is_input(const NodeId& name) const { return inputs_.count(name) > 0; }
  bool is_internal(const NodeId& name) const { return spaces_.count(name) && !is_input(name); }

  // State space behind a reference; throws UnknownNode if it does not resolve.
  const StateSpace& space(const NodeId& ref) const {
    auto [inst, node] = split_ref(ref);
    if (inst.empty()) {
      auto it = spaces_.find(node);
      if (it == spaces_.end()) throw UnknownNode("unknown node '" + ref + "'");
      return *it->second;
    }
    auto it = instances_.find(inst);
    if (it == instances_.end()) throw UnknownNode("unknown instance in reference '" + ref + "'");
    const NetworkClass& cls = registry_.find_class(it->second->class_name);
    if (std::find(cls.outputs.begin(), cls.outputs.end(), node) == cls.outputs.end())
      throw UnknownNode("'" + node + "' is not an output of class '" + cls.name + "'");
    for (const auto& n : cls.body.nodes)
      if (n.node == node) return n;
    throw UnknownNode("unknown node '" + ref + "'");
  }

  void check_bindings(const InstanceDecl& inst) const {
    const NetworkClass& cls = registry_.find_class(inst.class_name);
    for (const auto& [input, host] : inst.bindings) {
      auto in = std::find_if(cls.inputs.begin(), cls.inputs.end(), [&](const auto& s) { return s.node == input; });
      if (in == cls.inputs.end())
        throw UnknownNode("class '" + cls.name + "' has no input '" + input + "'");
      const StateSpace& host_space = space(host);
      if (!host_space.same_states(*in))
        throw StateSpaceMismatch("binding '" + inst.name + "." + input + "' to '" + host +
                                 "' has mismatched state spaces");
    }
  }

  // Edges into basic nodes must match the declared table parents.
  void check_structure() const {
    std::map<NodeId, NodeSet> edge_parents;
    for (const auto& e : body_.edges) {
      space(e.tail);
      if (!is_internal(e.head)) throw InvalidModel("edge head '" + e.head + "' is not an internal node");
      if (!edge_parents[e.head].insert(e.tail).second)
        throw InvalidModel("duplicate edge '" + e.tail + "' -> '" + e.head + "'");
    }
    std::set<NodeId> with_cpt;
    for (const auto& cpt : body_.cpts) {
      if (!is_internal(cpt.node)) throw InvalidModel("table for '" + cpt.node + "' which is not an internal node");
      if (!with_cpt.insert(cpt.node).second) throw InvalidModel("duplicate table for '" + cpt.node + "'");
      NodeSet declared;
      for (const auto& p : cpt.parents) {
        space(p);
        declared.insert(p);
      }
      if (declared != edge_parents[cpt.node] || declared.size() != cpt.parents.size())
        throw InvalidModel("table parents of '" + cpt.node + "' do not match its incoming edges");
    }
    for (const auto& n : body_.nodes)
      if (!with_cpt.count(n.node)) throw InvalidModel("node '" + n.node + "' has no table");
    for (const auto& inst : body_.instances) check_bindings(inst);
  }

 private:
  const OobnModel& registry_;
  const Network& body_;
  std::map<NodeId, const StateSpace*> spaces_;
  std::set<NodeId> inputs_;
  std::map<std::string, const InstanceDecl*> instances_;
};

}  // namespace detail

// Validates a class against the classes already registered in `registry`.
inline NetworkClass define_class(const OobnModel& registry, NetworkClass spec) {
  detail::require_plain_name(spec.name, "class");
  if (registry.has_class(spec.name)) throw DuplicateClass("class '" + spec.name + "' is already defined");
  detail::Scope scope(registry, spec.body, &spec.inputs, &spec.name);
  std::set<NodeId> seen;
  for (const auto& out : spec.outputs) {
    if (!scope.is_internal(out))
      throw DanglingInterface("output '" + out + "' of class '" + spec.name + "' is not an internal node");
    if (!seen.insert(out).second) throw DanglingInterface("output '" + out + "' listed twice");
  }
  scope.check_structure();
  return spec;
}

inline OobnModel OobnModel::with_class(NetworkClass cls) const {
  OobnModel out = *this;
  NetworkClass frozen = define_class(*this, std::move(cls));
  std::string name = frozen.name;
  out.classes_.emplace(name, std::make_shared<const NetworkClass>(std::move(frozen)));
  return out;
}

inline OobnModel OobnModel::with_top(Network top) const {
  detail::Scope(*this, top, nullptr, nullptr).check_structure();
  OobnModel out = *this;
  out.top_ = std::move(top);
  return out;
}

inline OobnModel instantiate(const OobnModel& model, const std::string& class_name, const std::string& instance_name,
                             const std::map<NodeId, NodeId>& bindings) {
  model.find_class(class_name);
  detail::require_plain_name(instance_name, "instance");
  for (const auto& n : model.top().nodes)
    if (n.node == instance_name) throw DuplicateInstance("'" + instance_name + "' already names a node");
  for (const auto& i : model.top().instances)
    if (i.name == instance_name) throw DuplicateInstance("instance '" + instance_name + "' already exists");

  InstanceDecl decl{instance_name, class_name, bindings};
  detail::Scope scope(model, model.top(), nullptr, nullptr);
  scope.check_bindings(decl);

  OobnModel out = model;
  out.top_.instances.push_back(std::move(decl));
  return out;
}

namespace detail {

struct FlatBuilder {
  const OobnModel& model;
  std::vector<StateSpace> spaces;
  std::vector<Cpt> cpts;

  void expand(const Network& body, const std::string& prefix, const std::map<NodeId, NodeId>& inputs) {
    auto resolve = [&](const NodeId& ref) -> NodeId {
      auto [inst, node] = split_ref(ref);
      if (!inst.empty()) return prefix + ref;
      auto it = inputs.find(ref);
      if (it != inputs.end()) return it->second;
      return prefix + ref;
    };
    for (const auto& n : body.nodes) {
      StateSpace s = n;
      s.node = prefix + n.node;
      spaces.push_back(std::move(s));
    }
    for (const auto& c : body.cpts) {
      Cpt flat = c;
      flat.node = prefix + c.node;
      for (auto& p : flat.parents) p = resolve(p);
      cpts.push_back(std::move(flat));
    }
    for (const auto& inst : body.instances) {
      const NetworkClass& cls = model.find_class(inst.class_name);
      std::map<NodeId, NodeId> bound;
      for (const auto& in : cls.inputs) {
        auto it = inst.bindings.find(in.node);
        if (it == inst.bindings.end())
          throw UnboundInput("input '" + in.node + "' of instance '" + prefix + inst.name + "' is not bound");
        bound[in.node] = resolve(it->second);
      }
      expand(cls.body, prefix + inst.name + kPathSeparator, bound);
    }
  }
};

}  // namespace detail

// Expands every instance into basic nodes with dot-qualified ids. Bound input
// nodes disappear: the host node becomes the parent directly.
inline DiscreteBayesNet flatten(const OobnModel& model) {
  detail::FlatBuilder builder{model, {}, {}};
  builder.expand(model.top(), "", {});
  NodeSet ids;
  for (const auto& s : builder.spaces) ids.insert(s.node);
  std::vector<Edge> edges;
  for (const auto& c : builder.cpts)
    for (const auto& p : c.parents) edges.push_back({p, c.node});
  Dag dag(ids, edges);
  return DiscreteBayesNet(std::move(dag), builder.spaces, builder.cpts);
}

}  // namespace evidentia
