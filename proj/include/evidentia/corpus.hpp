#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "evidentia/io/bn_json.hpp"
#include "evidentia/io/ceg_json.hpp"
#include "evidentia/io/oobn_json.hpp"
#include "evidentia/io/wigmore_json.hpp"

namespace evidentia {

struct EvidenceItem {
  std::string number;  // "13", "25a", "51"
  std::string text;
  std::optional<std::string> page_ref;
  std::string kind;  // proposition | testimony | evidence
  bool canonical = true;
  bool added_by_analysts = false;

  bool operator==(const EvidenceItem&) const = default;
};

struct KnifeSpec {
  double blade_length_cm = 0.0;
  double width_cm = 0.0;
  double thickness_mm = 0.0;
  std::vector<double> striations_cm;

  bool operator==(const KnifeSpec&) const = default;
};

struct WoundSpec {
  std::string side;  // left | right
  double depth_cm = 0.0;
  double length_cm = 0.0;
  double width_cm = 0.0;
  bool fatal = false;

  bool operator==(const WoundSpec&) const = default;
};

enum class ModelKind { bn, oobn, staged_tree, ceg, wigmore };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::bn: return "bn";
    case ModelKind::oobn: return "oobn";
    case ModelKind::staged_tree: return "staged_tree";
    case ModelKind::ceg: return "ceg";
    case ModelKind::wigmore: return "wigmore";
  }
  return "bn";
}

inline ModelKind model_kind_from(const std::string& s) {
  if (s == "bn") return ModelKind::bn;
  if (s == "oobn") return ModelKind::oobn;
  if (s == "staged_tree") return ModelKind::staged_tree;
  if (s == "ceg") return ModelKind::ceg;
  if (s == "wigmore") return ModelKind::wigmore;
  throw ParseError("unknown model kind '" + s + "'");
}

using ModelValue = std::variant<DiscreteBayesNet, OobnModel, StagedTree, Ceg, WigmoreChart>;

struct ModelEntry {
  std::string id;
  ModelKind kind = ModelKind::bn;
  std::string path;  // relative to the bundle directory
  ModelValue model;
  io::json metadata;  // carried through untouched

  bool operator==(const ModelEntry&) const = default;
};

struct CrossRef {
  std::string model;
  std::string element;

  bool operator==(const CrossRef&) const = default;
};

struct CaseBundle {
  std::string name;
  std::string items_path = "items.json";
  std::string measurements_path = "measurements.json";
  std::vector<EvidenceItem> items;
  KnifeSpec knife;
  std::vector<WoundSpec> wounds;
  std::vector<ModelEntry> models;
  std::map<std::string, std::vector<CrossRef>> crossref;
  io::json metadata;

  const ModelEntry& model(const std::string& id) const {
    for (const auto& m : models)
      if (m.id == id) return m;
    throw UnknownNode("unknown model '" + id + "'");
  }

  const ModelEntry* find_model(const std::string& id) const {
    for (const auto& m : models)
      if (m.id == id) return &m;
    return nullptr;
  }

  bool operator==(const CaseBundle&) const = default;
};

// ---------------------------------------------------------------------------
// Model documents
// ---------------------------------------------------------------------------

// Guesses the document kind from its top-level keys.
inline ModelKind detect_model_kind(const io::json& j) {
  if (!j.is_object()) throw ParseError("model document must be a JSON object");
  if (j.contains("classes")) return ModelKind::oobn;
  if (j.contains("probandum")) return ModelKind::wigmore;
  if (j.contains("positions")) return ModelKind::ceg;
  if (j.contains("vertices")) return ModelKind::staged_tree;
  if (j.contains("cpts")) return ModelKind::bn;
  throw ParseError("cannot tell what kind of model this document holds");
}

inline ModelValue model_from_json(ModelKind kind, const io::json& j) {
  switch (kind) {
    case ModelKind::bn: return io::bn_from_json(j);
    case ModelKind::oobn: return io::oobn_from_json(j);
    case ModelKind::staged_tree: return io::staged_tree_from_json(j);
    case ModelKind::ceg: return io::ceg_from_json(j);
    case ModelKind::wigmore: return io::chart_from_json(j);
  }
  throw ParseError("unknown model kind");
}

inline io::json model_to_json(const ModelValue& m) {
  return std::visit([](const auto& v) { return io::to_json(v); }, m);
}

// Every validator of the model's module; an empty report means usable.
inline ValidationReport validate_model(const ModelValue& m) {
  struct Visitor {
    ValidationReport operator()(const DiscreteBayesNet& net) const { return validate(net); }
    ValidationReport operator()(const OobnModel& model) const { return validate(flatten(model)); }
    ValidationReport operator()(const StagedTree& st) const { return validate_staging(st); }
    ValidationReport operator()(const Ceg&) const { return {}; }  // checked on construction
    ValidationReport operator()(const WigmoreChart&) const { return {}; }
  };
  return std::visit(Visitor{}, m);
}

// Element ids a crossref may point at: nodes, vertices, positions, edge labels.
inline std::set<std::string> model_elements(const ModelValue& m) {
  struct Visitor {
    std::set<std::string> operator()(const DiscreteBayesNet& net) const { return net.dag().nodes(); }
    std::set<std::string> operator()(const OobnModel& model) const { return flatten(model).dag().nodes(); }
    std::set<std::string> operator()(const StagedTree& st) const {
      std::set<std::string> out = st.tree().vertices();
      for (const auto& e : st.tree().edges()) out.insert(e.label);
      return out;
    }
    std::set<std::string> operator()(const Ceg& c) const {
      std::set<std::string> out;
      for (const auto& p : c.positions()) out.insert(p.id);
      for (const auto& e : c.edges()) out.insert(e.label);
      return out;
    }
    std::set<std::string> operator()(const WigmoreChart& chart) const {
      std::set<std::string> out;
      for (const auto& [id, _] : chart.nodes()) out.insert(id);
      return out;
    }
  };
  return std::visit(Visitor{}, m);
}

// ---------------------------------------------------------------------------
// Items and measurements
// ---------------------------------------------------------------------------

namespace detail {

inline EvidenceItem item_from_json(const io::json& j) {
  const std::string what = "item";
  io::expect_keys(j, what, {"number", "text", "kind"}, {"page_ref", "canonical", "added_by_analysts"});
  EvidenceItem item;
  item.number = io::get<std::string>(j, "number", what);
  item.text = io::get<std::string>(j, "text", what);
  item.kind = io::get<std::string>(j, "kind", what);
  if (j.contains("page_ref")) item.page_ref = io::get<std::string>(j, "page_ref", what);
  item.canonical = io::get_or<bool>(j, "canonical", true, what);
  item.added_by_analysts = io::get_or<bool>(j, "added_by_analysts", false, what);
  if (item.kind != "proposition" && item.kind != "testimony" && item.kind != "evidence")
    throw ParseError("item " + item.number + ": unknown kind '" + item.kind + "'");
  return item;
}

inline io::json to_json(const EvidenceItem& item) {
  io::json j = {{"number", item.number}, {"text", item.text}, {"kind", item.kind}, {"canonical", item.canonical}};
  if (item.page_ref) j["page_ref"] = *item.page_ref;
  if (item.added_by_analysts) j["added_by_analysts"] = true;
  return j;
}

// Accepts a bare array or {"format_version", "items"}.
inline std::vector<EvidenceItem> items_from_json(const io::json& j) {
  const io::json* list = &j;
  if (j.is_object()) {
    io::expect_keys(j, "items file", {"items"}, {"format_version"});
    io::check_version(j, "items file");
    list = &j.at("items");
  }
  if (!list->is_array()) throw ParseError("items file must hold an array of items");
  std::vector<EvidenceItem> items;
  for (const auto& i : *list) items.push_back(item_from_json(i));
  return items;
}

inline void measurements_from_json(const io::json& j, CaseBundle& b) {
  const std::string what = "measurements";
  io::expect_keys(j, what, {"knife", "wounds"}, {"format_version", "metadata"});
  io::check_version(j, what);
  const io::json& k = j.at("knife");
  io::expect_keys(k, "knife", {"blade_length_cm", "width_cm", "thickness_mm", "striations_cm"});
  b.knife = KnifeSpec{io::get<double>(k, "blade_length_cm", "knife"), io::get<double>(k, "width_cm", "knife"),
                      io::get<double>(k, "thickness_mm", "knife"),
                      io::get<std::vector<double>>(k, "striations_cm", "knife")};
  b.wounds.clear();
  for (const auto& w : io::array_at(j, "wounds", what)) {
    io::expect_keys(w, "wound", {"side", "depth_cm", "length_cm", "width_cm", "fatal"});
    b.wounds.push_back({io::get<std::string>(w, "side", "wound"), io::get<double>(w, "depth_cm", "wound"),
                        io::get<double>(w, "length_cm", "wound"), io::get<double>(w, "width_cm", "wound"),
                        io::get<bool>(w, "fatal", "wound")});
  }
}

inline io::json measurements_to_json(const CaseBundle& b) {
  io::json wounds = io::json::array();
  for (const auto& w : b.wounds)
    wounds.push_back({{"side", w.side},
                      {"depth_cm", w.depth_cm},
                      {"length_cm", w.length_cm},
                      {"width_cm", w.width_cm},
                      {"fatal", w.fatal}});
  return {{"format_version", io::kFormatVersion},
          {"knife",
           {{"blade_length_cm", b.knife.blade_length_cm},
            {"width_cm", b.knife.width_cm},
            {"thickness_mm", b.knife.thickness_mm},
            {"striations_cm", b.knife.striations_cm}}},
          {"wounds", wounds}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bundle
// ---------------------------------------------------------------------------

// Runs every sub-validator plus the corpus's own invariants.
inline ValidationReport validate_bundle(const CaseBundle& b) {
  ValidationReport report;
  auto add = [&](std::string code, std::string subject, std::string message) {
    report.push_back({std::move(code), std::move(subject), std::move(message)});
  };
  std::set<std::string> numbers;
  for (const auto& item : b.items) {
    if (!numbers.insert(item.number).second) add("duplicate-item", item.number, "item number used twice");
    if (item.text.empty()) add("empty-item-text", item.number, "item has no text");
    if (item.number == "51" && !item.added_by_analysts)
      add("unflagged-analyst-item", item.number, "item 51 must be flagged added_by_analysts");
  }
  const KnifeSpec& k = b.knife;
  if (!(k.blade_length_cm > 0 && k.width_cm > 0 && k.thickness_mm > 0))
    add("non-positive-measurement", "knife", "knife dimensions must be positive");
  for (double s : k.striations_cm)
    if (!(s > 0 && s <= k.blade_length_cm))
      add("striation-out-of-range", "knife", "striation lies outside the blade");
  for (const auto& w : b.wounds) {
    if (w.side != "left" && w.side != "right") add("bad-wound-side", w.side, "wound side must be left or right");
    if (!(w.depth_cm > 0 && w.length_cm > 0 && w.width_cm > 0))
      add("non-positive-measurement", w.side, "wound dimensions must be positive");
  }

  std::map<std::string, std::set<std::string>> elements;
  std::set<std::string> ids;
  for (const auto& m : b.models) {
    if (!ids.insert(m.id).second) add("duplicate-model", m.id, "model id used twice");
    try {
      for (auto f : validate_model(m.model)) {
        f.subject = m.id + ": " + f.subject;
        report.push_back(std::move(f));
      }
      elements[m.id] = model_elements(m.model);
    } catch (const Error& e) {
      add("submodel-error", m.id, e.kind() + ": " + e.what());
      elements[m.id];
    }
  }
  for (const auto& [item, refs] : b.crossref) {
    if (!numbers.count(item)) add("crossref-unknown-item", item, "crossref names an item not in the list");
    for (const auto& r : refs) {
      auto it = elements.find(r.model);
      if (it == elements.end())
        add("crossref-unknown-model", item, "crossref names unknown model '" + r.model + "'");
      else if (!it->second.count(r.element))
        add("crossref-unknown-element", item, "model '" + r.model + "' has no element '" + r.element + "'");
    }
  }
  return report;
}

// Reads the manifest and every file it names without running the bundle
// validators. Parse failures still throw.
inline CaseBundle read_case_bundle(const std::filesystem::path& manifest_path) {
  std::filesystem::path manifest = manifest_path;
  if (std::filesystem::is_directory(manifest)) manifest /= "case.json";
  const std::filesystem::path dir = manifest.parent_path();
  io::json j = io::read_json_file(manifest);
  const std::string what = "case manifest";
  io::expect_keys(j, what, {"name", "items", "measurements", "models"}, {"format_version", "crossref", "metadata"});
  io::check_version(j, what);

  CaseBundle b;
  b.name = io::get<std::string>(j, "name", what);
  b.items_path = io::get<std::string>(j, "items", what);
  b.measurements_path = io::get<std::string>(j, "measurements", what);
  b.metadata = j.value("metadata", io::json());
  b.items = detail::items_from_json(io::read_json_file(dir / b.items_path));
  detail::measurements_from_json(io::read_json_file(dir / b.measurements_path), b);

  for (const auto& m : io::array_at(j, "models", what)) {
    io::expect_keys(m, "model entry", {"id", "kind", "path"});
    ModelEntry entry;
    entry.id = io::get<std::string>(m, "id", "model entry");
    entry.kind = model_kind_from(io::get<std::string>(m, "kind", "model entry"));
    entry.path = io::get<std::string>(m, "path", "model entry");
    io::json doc = io::read_json_file(dir / entry.path);
    try {
      entry.model = model_from_json(entry.kind, doc);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw SubmodelInvalid("model '" + entry.id + "': " + e.kind() + ": " + e.what());
    }
    entry.metadata = doc.value("metadata", io::json());
    b.models.push_back(std::move(entry));
  }

  if (j.contains("crossref")) {
    const io::json& refs = j.at("crossref");
    if (!refs.is_object()) throw ParseError(what + ": 'crossref' must be an object");
    for (const auto& [item, list] : refs.items()) {
      if (!list.is_array()) throw ParseError(what + ": crossref for item " + item + " must be an array");
      auto& out = b.crossref[item];
      for (const auto& r : list) {
        io::expect_keys(r, "crossref", {"model", "element"});
        out.push_back({io::get<std::string>(r, "model", "crossref"), io::get<std::string>(r, "element", "crossref")});
      }
    }
  }

  return b;
}

inline CaseBundle load_case_bundle(const std::filesystem::path& manifest_path) {
  CaseBundle b = read_case_bundle(manifest_path);
  ValidationReport report = validate_bundle(b);
  for (const auto& f : report)
    if (f.code.rfind("crossref-", 0) == 0) throw CrossrefError(f.subject + ": " + f.message);
  if (!report.empty()) {
    const auto& f = report.front();
    throw SubmodelInvalid(f.code + " (" + f.subject + "): " + f.message);
  }
  return b;
}

inline const EvidenceItem& get_item(const CaseBundle& b, const std::string& number) {
  for (const auto& item : b.items)
    if (item.number == number) return item;
  throw UnknownItem("no evidence item numbered '" + number + "'");
}

inline std::vector<CrossRef> cross_reference(const CaseBundle& b, const std::string& number) {
  get_item(b, number);
  auto it = b.crossref.find(number);
  if (it == b.crossref.end()) return {};
  return it->second;
}

inline io::json manifest_to_json(const CaseBundle& b) {
  io::json models = io::json::array();
  for (const auto& m : b.models) models.push_back({{"id", m.id}, {"kind", to_string(m.kind)}, {"path", m.path}});
  io::json crossref = io::json::object();
  for (const auto& [item, refs] : b.crossref) {
    io::json list = io::json::array();
    for (const auto& r : refs) list.push_back({{"model", r.model}, {"element", r.element}});
    crossref[item] = list;
  }
  io::json j = {{"format_version", io::kFormatVersion},
                {"name", b.name},
                {"items", b.items_path},
                {"measurements", b.measurements_path},
                {"models", models},
                {"crossref", crossref}};
  if (!b.metadata.is_null()) j["metadata"] = b.metadata;
  return j;
}

inline io::json items_to_json(const std::vector<EvidenceItem>& items) {
  io::json list = io::json::array();
  for (const auto& i : items) list.push_back(detail::to_json(i));
  return {{"format_version", io::kFormatVersion}, {"items", list}};
}

// Writes the manifest as `dir/case.json` and every referenced file next to it.
inline void save_case_bundle(const CaseBundle& b, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  auto write = [&](const std::string& rel, const io::json& j) {
    auto path = dir / rel;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    io::write_json_file(path, j);
  };
  write("case.json", manifest_to_json(b));
  write(b.items_path, items_to_json(b.items));
  write(b.measurements_path, detail::measurements_to_json(b));
  for (const auto& m : b.models) {
    io::json doc = model_to_json(m.model);
    if (!m.metadata.is_null()) doc["metadata"] = m.metadata;
    write(m.path, doc);
  }
}

}  // namespace evidentia
