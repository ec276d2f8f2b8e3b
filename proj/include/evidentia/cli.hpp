#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evidentia/corpus.hpp"
#include "evidentia/dot.hpp"
#include "evidentia/enumeration.hpp"
#include "evidentia/junction_tree.hpp"
#include "evidentia/service_http.hpp"

namespace evidentia::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Bad invocation that CLI11 cannot see (wrong model kind, missing bundle).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

struct Common {
  bool json = false;
  std::string case_dir;
};

inline std::string fixed(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", p);
  return buf;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

inline std::string case_dir_or_env(const Common& c) {
  if (!c.case_dir.empty()) return c.case_dir;
  if (const char* env = std::getenv("EVIDENTIA_CASE_DIR"); env && *env) return env;
  return {};
}

inline CaseBundle require_bundle(const Common& c) {
  std::string dir = case_dir_or_env(c);
  if (dir.empty()) throw UsageError("no case bundle: pass --case or set EVIDENTIA_CASE_DIR");
  return load_case_bundle(dir);
}

struct Loaded {
  std::string id;
  ModelKind kind;
  ModelValue model;
};

// A model argument is a file path, or else a model id in the case bundle.
inline Loaded load_model(const std::string& ref, const Common& c) {
  if (std::filesystem::is_regular_file(ref)) {
    io::json doc = io::read_json_file(ref);
    ModelKind kind = detect_model_kind(doc);
    return {std::filesystem::path(ref).stem().string(), kind, model_from_json(kind, doc)};
  }
  std::string dir = case_dir_or_env(c);
  if (!dir.empty()) {
    CaseBundle b = load_case_bundle(dir);
    if (const ModelEntry* m = b.find_model(ref)) return {m->id, m->kind, m->model};
  }
  throw ParseError("cannot open model '" + ref + "'");
}

inline DiscreteBayesNet as_net(const Loaded& m) {
  if (m.kind == ModelKind::bn) return std::get<DiscreteBayesNet>(m.model);
  if (m.kind == ModelKind::oobn) return flatten(std::get<OobnModel>(m.model));
  throw UsageError("model '" + m.id + "' is a " + to_string(m.kind) + ", not a Bayesian network");
}

inline Ceg as_ceg(const Loaded& m) {
  if (m.kind == ModelKind::ceg) return std::get<Ceg>(m.model);
  if (m.kind == ModelKind::staged_tree) return to_ceg(std::get<StagedTree>(m.model));
  throw UsageError("model '" + m.id + "' is a " + to_string(m.kind) + ", not a staged tree or CEG");
}

inline const WigmoreChart& as_chart(const Loaded& m) {
  if (m.kind != ModelKind::wigmore) throw UsageError("model '" + m.id + "' is not a Wigmore chart");
  return std::get<WigmoreChart>(m.model);
}

inline EvidenceSet read_evidence(const std::string& file, const std::vector<std::string>& hard) {
  EvidenceSet ev;
  if (!file.empty()) ev = io::evidence_from_json(io::read_json_file(file));
  for (const auto& h : hard) {
    auto eq = h.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == h.size())
      throw UsageError("--hard expects node=state, got '" + h + "'");
    ev.hard[h.substr(0, eq)] = h.substr(eq + 1);
  }
  for (const auto& [node, _] : ev.hard)
    if (ev.soft.count(node)) throw ConflictingEvidence("node '" + node + "' has both hard and soft evidence");
  return ev;
}

inline void write_or_print(const std::string& out_file, const std::string& text, Streams& s) {
  if (out_file.empty()) {
    s.out << text;
    return;
  }
  std::ofstream f(out_file);
  if (!f || !(f << text)) throw IoError("cannot write '" + out_file + "'");
}

inline io::json paths_json(const Ceg& c) {
  io::json list = io::json::array();
  double total = 0.0;
  for (const auto& p : enumerate_paths(c)) {
    list.push_back(io::to_json(p, c));
    total += p.probability;
  }
  return {{"paths", list}, {"total_probability", total}};
}

inline void print_paths(const Ceg& c, Streams& s) {
  for (const auto& p : enumerate_paths(c)) s.out << fixed(p.probability) << "  " << join(p.labels, " > ") << "\n";
}

inline void print_ceg(const Ceg& c, Streams& s) {
  s.out << "positions: " << c.positions().size() << "\n";
  for (const auto& p : c.positions())
    s.out << "  " << p.id << "\t" << (p.stage.empty() ? "-" : p.stage) << "\t" << join(p.members, ",") << "\n";
  s.out << "edges: " << c.edges().size() << "\n";
  for (const auto& e : c.edges())
    s.out << "  " << e.tail << " -> " << e.head << "\t" << (e.evidence ? "E: " : "") << e.label << "\t"
          << fixed(e.probability) << "\n";
}

inline io::json item_json(const EvidenceItem& item) { return evidentia::detail::to_json(item); }

}  // namespace detail

// Runs one invocation. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  detail::Streams s{out, err};
  CLI::App app{"Graphical models for forensic evidence", "evidentia"};
  app.require_subcommand(1);
  std::function<void()> action;

  auto common = [](CLI::App* sub, detail::Common& c) {
    sub->add_flag("--json", c.json, "Machine-readable JSON output");
    sub->add_option("--case", c.case_dir, "Case bundle directory or manifest");
  };

  // validate
  detail::Common validate_c;
  std::string validate_file;
  auto* validate_cmd = app.add_subcommand("validate", "Validate a model document or case manifest");
  validate_cmd->add_option("file", validate_file, "Model document or case.json")->required();
  common(validate_cmd, validate_c);
  int validate_exit = kExitOk;
  validate_cmd->callback([&] {
    action = [&] {
      io::json doc = io::read_json_file(validate_file);
      ValidationReport report;
      std::string kind;
      if (doc.is_object() && doc.contains("items") && doc.contains("models")) {
        kind = "case";
        report = validate_bundle(read_case_bundle(validate_file));
      } else {
        ModelKind k = detect_model_kind(doc);
        kind = to_string(k);
        try {
          report = validate_model(model_from_json(k, doc));
        } catch (const ParseError&) {
          throw;
        } catch (const Error& e) {
          report.push_back({e.kind(), validate_file, e.what()});
        }
      }
      if (validate_c.json) {
        s.out << io::dump({{"kind", kind}, {"valid", report.empty()}, {"findings", io::report_to_json(report)}});
      } else if (report.empty()) {
        s.out << "valid " << kind << "\n";
      } else {
        for (const auto& f : report) s.out << f.code << "\t" << f.subject << "\t" << f.message << "\n";
      }
      validate_exit = report.empty() ? kExitOk : kExitDomain;
    };
  });

  // ci
  detail::Common ci_c;
  std::string ci_model;
  std::vector<std::string> ci_a, ci_b, ci_given;
  std::optional<double> ci_numeric;
  auto* ci_cmd = app.add_subcommand("ci", "Decide a conditional independence query");
  ci_cmd->add_option("--model", ci_model, "Network document or model id")->required();
  ci_cmd->add_option("--a", ci_a, "Node in the first set (repeatable)")->required();
  ci_cmd->add_option("--b", ci_b, "Node in the second set (repeatable)")->required();
  ci_cmd->add_option("--given", ci_given, "Conditioning node (repeatable)");
  ci_cmd->add_option("--numeric", ci_numeric, "Also check numerically at this tolerance");
  common(ci_cmd, ci_c);
  ci_cmd->callback([&] {
    action = [&] {
      DiscreteBayesNet net = detail::as_net(detail::load_model(ci_model, ci_c));
      CiQuery q{NodeSet(ci_a.begin(), ci_a.end()), NodeSet(ci_b.begin(), ci_b.end()),
                NodeSet(ci_given.begin(), ci_given.end())};
      bool independent = query_ci(net.dag(), q);
      std::optional<bool> numeric;
      if (ci_numeric) numeric = numeric_ci_check(net, q, *ci_numeric);
      if (ci_c.json) {
        io::json j = {{"a", q.a}, {"b", q.b}, {"given", q.c}, {"independent", independent}};
        if (numeric) j["numeric"] = *numeric;
        s.out << io::dump(j);
      } else {
        s.out << "independent: " << (independent ? "true" : "false") << "\n";
        if (numeric) s.out << "numeric: " << (*numeric ? "true" : "false") << "\n";
      }
    };
  });

  // infer / evidence-prob
  detail::Common infer_c;
  std::string infer_model, infer_evidence;
  std::vector<std::string> infer_hard, infer_nodes;
  auto* infer_cmd = app.add_subcommand("infer", "Posterior marginals given evidence");
  infer_cmd->add_option("--model", infer_model, "Network or OOBN document, or model id")->required();
  infer_cmd->add_option("--evidence", infer_evidence, "Evidence document");
  infer_cmd->add_option("--hard", infer_hard, "Hard evidence node=state (repeatable)");
  infer_cmd->add_option("--node", infer_nodes, "Report only this node (repeatable)");
  common(infer_cmd, infer_c);
  infer_cmd->callback([&] {
    action = [&] {
      DiscreteBayesNet net = detail::as_net(detail::load_model(infer_model, infer_c));
      EvidenceSet ev = detail::read_evidence(infer_evidence, infer_hard);
      for (const auto& v : infer_nodes) net.space(v);
      PosteriorReport r = posterior_marginals(net, ev);
      if (infer_c.json) {
        s.out << io::dump(io::to_json(r, net, infer_nodes));
        return;
      }
      s.out << "evidence probability: " << detail::fixed(r.evidence_probability) << "\n";
      for (const auto& [node, probs] : r.marginals) {
        if (!infer_nodes.empty() && std::find(infer_nodes.begin(), infer_nodes.end(), node) == infer_nodes.end())
          continue;
        const auto& states = net.space(node).states;
        for (std::size_t i = 0; i < probs.size(); ++i)
          s.out << node << "\t" << states[i] << "\t" << detail::fixed(probs[i]) << "\n";
      }
    };
  });

  detail::Common eprob_c;
  std::string eprob_model, eprob_evidence;
  std::vector<std::string> eprob_hard;
  auto* eprob_cmd = app.add_subcommand("evidence-prob", "Probability of the evidence");
  eprob_cmd->add_option("--model", eprob_model, "Network or OOBN document, or model id")->required();
  eprob_cmd->add_option("--evidence", eprob_evidence, "Evidence document");
  eprob_cmd->add_option("--hard", eprob_hard, "Hard evidence node=state (repeatable)");
  common(eprob_cmd, eprob_c);
  eprob_cmd->callback([&] {
    action = [&] {
      DiscreteBayesNet net = detail::as_net(detail::load_model(eprob_model, eprob_c));
      double p = probability_of_evidence(net, detail::read_evidence(eprob_evidence, eprob_hard));
      if (eprob_c.json)
        s.out << io::dump({{"evidence_probability", p}});
      else
        s.out << "evidence probability: " << detail::fixed(p) << "\n";
    };
  });

  // oobn flatten
  auto* oobn_cmd = app.add_subcommand("oobn", "Object-oriented network operations");
  oobn_cmd->require_subcommand(1);
  detail::Common flat_c;
  std::string flat_model, flat_out;
  auto* flat_cmd = oobn_cmd->add_subcommand("flatten", "Expand every instance into one network");
  flat_cmd->add_option("--model", flat_model, "OOBN document or model id")->required();
  flat_cmd->add_option("--out", flat_out, "Write the network here");
  common(flat_cmd, flat_c);
  flat_cmd->callback([&] {
    action = [&] {
      detail::Loaded m = detail::load_model(flat_model, flat_c);
      if (m.kind != ModelKind::oobn) throw UsageError("model '" + m.id + "' is not an OOBN");
      DiscreteBayesNet net = flatten(std::get<OobnModel>(m.model));
      if (flat_c.json || !flat_out.empty()) {
        detail::write_or_print(flat_out, io::dump(io::to_json(net)), s);
        return;
      }
      for (const auto& [id, space] : net.spaces())
        s.out << id << "\t" << detail::join(space.states, ",") << "\t" << detail::join(net.cpt(id).parents, ", ")
              << "\n";
    };
  });

  // ceg build / paths / condition / from-bn
  auto* ceg_cmd = app.add_subcommand("ceg", "Staged tree and chain event graph operations");
  ceg_cmd->require_subcommand(1);

  detail::Common build_c;
  std::string build_model, build_out;
  auto* build_cmd = ceg_cmd->add_subcommand("build", "Collapse a staged tree into a CEG");
  build_cmd->add_option("--model", build_model, "Staged tree document or model id")->required();
  build_cmd->add_option("--out", build_out, "Write the CEG here");
  common(build_cmd, build_c);
  build_cmd->callback([&] {
    action = [&] {
      detail::Loaded m = detail::load_model(build_model, build_c);
      if (m.kind != ModelKind::staged_tree) throw UsageError("model '" + m.id + "' is not a staged tree");
      Ceg c = to_ceg(std::get<StagedTree>(m.model));
      if (build_c.json || !build_out.empty())
        detail::write_or_print(build_out, io::dump(io::to_json(c)), s);
      else
        detail::print_ceg(c, s);
    };
  });

  detail::Common paths_c;
  std::string paths_model;
  auto* paths_cmd = ceg_cmd->add_subcommand("paths", "List root-to-sink paths with probabilities");
  paths_cmd->add_option("--model", paths_model, "Staged tree or CEG document, or model id")->required();
  common(paths_cmd, paths_c);
  paths_cmd->callback([&] {
    action = [&] {
      Ceg c = detail::as_ceg(detail::load_model(paths_model, paths_c));
      if (paths_c.json)
        s.out << io::dump(detail::paths_json(c));
      else
        detail::print_paths(c, s);
    };
  });

  detail::Common cond_c;
  std::string cond_model, cond_out;
  PathFilter cond_filter;
  auto* cond_cmd = ceg_cmd->add_subcommand("condition", "Keep the paths matching a filter and renormalize");
  cond_cmd->add_option("--model", cond_model, "Staged tree or CEG document, or model id")->required();
  cond_cmd->add_option("--require", cond_filter.require_labels, "Label every kept path carries (repeatable)");
  cond_cmd->add_option("--exclude", cond_filter.exclude_labels, "Label no kept path carries (repeatable)");
  cond_cmd->add_option("--through", cond_filter.through_positions, "Position every kept path visits (repeatable)");
  cond_cmd->add_option("--out", cond_out, "Write the conditioned CEG here");
  common(cond_cmd, cond_c);
  cond_cmd->callback([&] {
    action = [&] {
      Ceg c = detail::as_ceg(detail::load_model(cond_model, cond_c));
      double kept = 0.0;
      for (const auto& p : enumerate_paths(c))
        if (cond_filter(p)) kept += p.probability;
      Ceg conditioned = condition(c, cond_filter);
      if (!cond_out.empty()) detail::write_or_print(cond_out, io::dump(io::to_json(conditioned)), s);
      if (cond_c.json) {
        io::json j = detail::paths_json(conditioned);
        j["kept_mass"] = kept;
        j["ceg"] = io::to_json(conditioned);
        s.out << io::dump(j);
      } else {
        s.out << "kept mass: " << detail::fixed(kept) << "\n";
        detail::print_paths(conditioned, s);
      }
    };
  });

  detail::Common frombn_c;
  std::string frombn_model, frombn_out;
  std::vector<std::string> frombn_order;
  std::size_t frombn_cap = kDefaultJointCap;
  auto* frombn_cmd = ceg_cmd->add_subcommand("from-bn", "Unfold a network into a staged tree");
  frombn_cmd->add_option("--model", frombn_model, "Network or OOBN document, or model id")->required();
  frombn_cmd->add_option("--order", frombn_order, "Variable order, one --order per node");
  frombn_cmd->add_option("--cap", frombn_cap, "Largest tree to unfold");
  frombn_cmd->add_option("--out", frombn_out, "Write the staged tree here");
  common(frombn_cmd, frombn_c);
  frombn_cmd->callback([&] {
    action = [&] {
      DiscreteBayesNet net = detail::as_net(detail::load_model(frombn_model, frombn_c));
      std::optional<std::vector<NodeId>> order;
      if (!frombn_order.empty()) order = frombn_order;
      StagedTree st = bn_to_ceg(net, order, frombn_cap);
      if (frombn_c.json || !frombn_out.empty()) {
        detail::write_or_print(frombn_out, io::dump(io::to_json(st)), s);
        return;
      }
      s.out << "vertices: " << st.tree().vertices().size() << "\n";
      s.out << "stages: " << st.stages().size() << "\n";
      for (const auto& [id, stage] : st.stages()) s.out << "  " << id << "\t" << stage.members.size() << "\n";
    };
  });

  // wigmore relevance / chains
  auto* wig_cmd = app.add_subcommand("wigmore", "Wigmore chart queries");
  wig_cmd->require_subcommand(1);

  detail::Common rel_c;
  std::string rel_model;
  auto* rel_cmd = wig_cmd->add_subcommand("relevance", "Split chart nodes by relevance to the probandum");
  rel_cmd->add_option("--model", rel_model, "Chart document or model id")->required();
  common(rel_cmd, rel_c);
  rel_cmd->callback([&] {
    action = [&] {
      detail::Loaded m = detail::load_model(rel_model, rel_c);
      const WigmoreChart& chart = detail::as_chart(m);
      Relevance r = relevant_items(chart);
      if (rel_c.json) {
        io::json j = io::to_json(r);
        j["probandum"] = chart.probandum();
        s.out << io::dump(j);
        return;
      }
      s.out << "probandum: " << chart.probandum() << "\n";
      s.out << "relevant: " << r.relevant.size() << "\n";
      for (const auto& v : r.relevant) s.out << "  " << v << "\n";
      s.out << "irrelevant: " << r.irrelevant.size() << "\n";
      for (const auto& v : r.irrelevant) s.out << "  " << v << "\n";
    };
  });

  detail::Common chains_c;
  std::string chains_model, chains_item, chains_target;
  auto* chains_cmd = wig_cmd->add_subcommand("chains", "Argument chains from a node to a probandum");
  chains_cmd->add_option("--model", chains_model, "Chart document or model id")->required();
  chains_cmd->add_option("--item", chains_item, "Starting node")->required();
  chains_cmd->add_option("--target", chains_target, "Target probandum (default: the chart's)");
  common(chains_cmd, chains_c);
  chains_cmd->callback([&] {
    action = [&] {
      detail::Loaded m = detail::load_model(chains_model, chains_c);
      const WigmoreChart& chart = detail::as_chart(m);
      std::optional<NodeId> target;
      if (!chains_target.empty()) target = chains_target;
      auto chains = argument_chains(chart, chains_item, target);
      if (chains_c.json) {
        io::json list = io::json::array();
        for (const auto& c : chains) list.push_back(io::to_json(c));
        s.out << io::dump({{"item", chains_item}, {"target", target.value_or(chart.probandum())}, {"chains", list}});
        return;
      }
      for (const auto& c : chains) {
        s.out << c.nodes.front();
        for (std::size_t i = 0; i < c.polarities.size(); ++i)
          s.out << " -(" << to_string(c.polarities[i]) << ")-> " << c.nodes[i + 1];
        s.out << "\n";
      }
    };
  });

  // case show / crossref
  auto* case_cmd = app.add_subcommand("case", "Case bundle queries");
  case_cmd->require_subcommand(1);

  detail::Common show_c;
  std::string show_item;
  auto* show_cmd = case_cmd->add_subcommand("show", "Show the evidence list or one item");
  show_cmd->add_option("--item", show_item, "Item number");
  common(show_cmd, show_c);
  show_cmd->callback([&] {
    action = [&] {
      CaseBundle b = detail::require_bundle(show_c);
      if (!show_item.empty()) {
        const EvidenceItem& item = get_item(b, show_item);
        if (show_c.json) {
          s.out << io::dump(detail::item_json(item));
        } else {
          s.out << item.number << " [" << item.kind << "] " << item.text << "\n";
          if (item.page_ref) s.out << "page: " << *item.page_ref << "\n";
        }
        return;
      }
      if (show_c.json) {
        io::json items = io::json::array(), models = io::json::array();
        for (const auto& item : b.items) items.push_back(detail::item_json(item));
        for (const auto& m : b.models) models.push_back({{"id", m.id}, {"kind", to_string(m.kind)}, {"path", m.path}});
        io::json measurements = evidentia::detail::measurements_to_json(b);
        measurements.erase("format_version");
        s.out << io::dump({{"name", b.name}, {"items", items}, {"measurements", measurements}, {"models", models}});
        return;
      }
      s.out << b.name << "\n";
      for (const auto& item : b.items) s.out << item.number << "\t" << item.kind << "\t" << item.text << "\n";
    };
  });

  detail::Common xref_c;
  std::string xref_item;
  auto* xref_cmd = case_cmd->add_subcommand("crossref", "Model elements encoding an item");
  xref_cmd->add_option("--item", xref_item, "Item number")->required();
  common(xref_cmd, xref_c);
  xref_cmd->callback([&] {
    action = [&] {
      CaseBundle b = detail::require_bundle(xref_c);
      auto refs = cross_reference(b, xref_item);
      if (xref_c.json) {
        io::json list = io::json::array();
        for (const auto& r : refs) list.push_back({{"model", r.model}, {"element", r.element}});
        s.out << io::dump({{"item", xref_item}, {"refs", list}});
        return;
      }
      for (const auto& r : refs) s.out << r.model << "\t" << r.element << "\n";
    };
  });

  // export dot
  auto* export_cmd = app.add_subcommand("export", "Export models to other formats");
  export_cmd->require_subcommand(1);
  detail::Common dot_c;
  std::string dot_model, dot_out;
  bool dot_moral = false;
  auto* dot_cmd = export_cmd->add_subcommand("dot", "Graphviz DOT of any model");
  dot_cmd->add_option("--model", dot_model, "Model document or model id")->required();
  dot_cmd->add_option("--out", dot_out, "Write DOT here");
  dot_cmd->add_flag("--moral", dot_moral, "Moral graph of a network instead of the DAG");
  common(dot_cmd, dot_c);
  dot_cmd->callback([&] {
    action = [&] {
      detail::Loaded m = detail::load_model(dot_model, dot_c);
      std::string text;
      switch (m.kind) {
        case ModelKind::bn:
        case ModelKind::oobn: {
          Dag g = detail::as_net(m).dag();
          text = dot_moral ? to_dot(moralize(g), m.id) : to_dot(g, m.id);
          break;
        }
        case ModelKind::staged_tree:
        case ModelKind::ceg: text = to_dot(detail::as_ceg(m), m.id); break;
        case ModelKind::wigmore: text = to_dot(std::get<WigmoreChart>(m.model), m.id); break;
      }
      if (dot_c.json)
        detail::write_or_print(dot_out, io::dump({{"id", m.id}, {"format", "dot"}, {"dot", text}}), s);
      else
        detail::write_or_print(dot_out, text, s);
    };
  });

  // serve
  bool serve_json = false;
  std::vector<std::string> serve_cases;
  ServeOptions serve_opts;
  int serve_exit = kExitOk;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP query service");
  serve_cmd->add_option("--case", serve_cases, "Case bundle to serve (repeatable)");
  serve_cmd->add_option("--bind", serve_opts.bind, "host:port (default EVIDENTIA_BIND or 127.0.0.1:8080)");
  serve_cmd->add_flag("--dev", serve_opts.dev, "Permissive CORS for local development");
  serve_cmd->add_option("--ui", serve_opts.ui_dir, "Static UI bundle served at /");
  serve_cmd->add_flag("--json", serve_json, "Report the startup as JSON");
  serve_cmd->callback([&] {
    action = [&] {
      if (serve_cases.empty()) {
        std::string dir = detail::case_dir_or_env({});
        if (dir.empty()) throw UsageError("no case bundle: pass --case or set EVIDENTIA_CASE_DIR");
        serve_cases.push_back(dir);
      }
      std::vector<CaseBundle> bundles;
      for (const auto& c : serve_cases) bundles.push_back(load_case_bundle(c));
      Service service(std::move(bundles));
      if (serve_json) {
        io::json models = io::json::array();
        for (const auto& b : service.bundles())
          for (const auto& m : b.models) models.push_back({{"id", m.id}, {"kind", to_string(m.kind)}, {"case", b.name}});
        s.out << io::dump({{"bind", resolve_bind(serve_opts)}, {"prefix", kApiPrefix}, {"models", models}});
        s.out.flush();
      }
      serve_exit = serve(service, serve_opts, s.err);
    };
  });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, s.out, s.err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (!action) return kExitUsage;
  try {
    action();
  } catch (const UsageError& e) {
    s.err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    s.err << "error: ParseError: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    s.err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    s.err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  if (validate_cmd->parsed()) return validate_exit;
  if (serve_cmd->parsed()) return serve_exit;
  return kExitOk;
}

}  // namespace evidentia::cli
