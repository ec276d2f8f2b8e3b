#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evidentia/corpus.hpp"
#include "evidentia/dot.hpp"
#include "evidentia/enumeration.hpp"
#include "evidentia/junction_tree.hpp"

namespace evidentia {

inline const std::string kApiPrefix = "/api/v1";

struct ApiResponse {
  int status = 200;
  io::json body;
};

// Request handlers over immutable loaded bundles. No handler mutates state,
// so one instance can serve concurrent requests.
class Service {
 public:
  explicit Service(std::vector<CaseBundle> bundles) : bundles_(std::move(bundles)) {
    for (std::size_t b = 0; b < bundles_.size(); ++b) {
      auto report = validate_bundle(bundles_[b]);
      if (!report.empty())
        throw SubmodelInvalid("bundle '" + bundles_[b].name + "': " + report.front().code + " (" +
                              report.front().subject + ")");
      for (const auto& m : bundles_[b].models) add_model(bundles_[b], m);
    }
  }

  const std::vector<CaseBundle>& bundles() const { return bundles_; }

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body) const {
    try {
      return route(method, path, body);
    } catch (const NotFound& e) {
      return error(404, "NotFound", e.what());
    } catch (const ParseError& e) {
      return error(400, e.kind(), e.what());
    } catch (const UnknownItem& e) {
      return error(404, e.kind(), e.what());
    } catch (const Error& e) {
      return error(422, e.kind(), e.what());
    } catch (const std::exception& e) {
      return error(500, "InternalError", e.what());
    }
  }

 private:
  struct NotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  struct Served {
    std::string id;
    ModelKind kind;
    std::string bundle;
    std::shared_ptr<const DiscreteBayesNet> net;
    std::shared_ptr<const CliqueTree> junction;
    std::shared_ptr<const Ceg> ceg;
    std::shared_ptr<const WigmoreChart> chart;
  };

  void add_model(const CaseBundle& bundle, const ModelEntry& m) {
    if (models_.count(m.id)) throw SubmodelInvalid("model id '" + m.id + "' is served twice");
    Served s{m.id, m.kind, bundle.name, nullptr, nullptr, nullptr, nullptr};
    switch (m.kind) {
      case ModelKind::bn:
        s.net = std::make_shared<const DiscreteBayesNet>(std::get<DiscreteBayesNet>(m.model));
        break;
      case ModelKind::oobn:
        s.net = std::make_shared<const DiscreteBayesNet>(flatten(std::get<OobnModel>(m.model)));
        break;
      case ModelKind::staged_tree:
        s.ceg = std::make_shared<const Ceg>(to_ceg(std::get<StagedTree>(m.model)));
        break;
      case ModelKind::ceg:
        s.ceg = std::make_shared<const Ceg>(std::get<Ceg>(m.model));
        break;
      case ModelKind::wigmore:
        s.chart = std::make_shared<const WigmoreChart>(std::get<WigmoreChart>(m.model));
        break;
    }
    if (s.net) s.junction = std::make_shared<const CliqueTree>(*s.net);
    models_.emplace(m.id, std::move(s));
  }

  static ApiResponse error(int status, const std::string& kind, const std::string& message) {
    return {status, {{"error", {{"kind", kind}, {"message", message}}}}};
  }

  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : path) {
      if (c == '/') {
        if (!current.empty()) parts.push_back(std::move(current));
        current.clear();
      } else {
        current += c;
      }
    }
    if (!current.empty()) parts.push_back(std::move(current));
    return parts;
  }

  static io::json parse_body(const std::string& body) {
    if (body.empty()) return io::json::object();
    return io::parse_text(body, "request body");
  }

  const CaseBundle& primary() const {
    if (bundles_.empty()) throw NotFound("no case bundle is loaded");
    return bundles_.front();
  }

  const Served& served(const std::string& id) const {
    auto it = models_.find(id);
    if (it == models_.end()) throw NotFound("unknown model '" + id + "'");
    return it->second;
  }

  const Served& served_net(const std::string& id) const {
    const Served& s = served(id);
    if (!s.net) throw NotFound("model '" + id + "' is not a Bayesian network");
    return s;
  }

  const Served& served_ceg(const std::string& id) const {
    const Served& s = served(id);
    if (!s.ceg) throw NotFound("model '" + id + "' is not an event graph");
    return s;
  }

  const Served& served_chart(const std::string& id) const {
    const Served& s = served(id);
    if (!s.chart) throw NotFound("model '" + id + "' is not a Wigmore chart");
    return s;
  }

  ApiResponse route(const std::string& method, const std::string& path, const std::string& body) const {
    auto prefix = split(kApiPrefix);
    auto parts = split(path);
    if (parts.size() < prefix.size() || !std::equal(prefix.begin(), prefix.end(), parts.begin()))
      throw NotFound("no route for '" + path + "'");
    parts.erase(parts.begin(), parts.begin() + static_cast<std::ptrdiff_t>(prefix.size()));
    const std::size_t n = parts.size();
    const bool get = method == "GET", post = method == "POST";

    if (get && n == 1 && parts[0] == "models") return {200, models_json()};
    if (get && n == 2 && parts[0] == "case" && parts[1] == "items") return {200, items_json()};
    if (get && n == 3 && parts[0] == "case" && parts[1] == "items")
      return {200, detail::to_json(get_item(primary(), parts[2]))};
    if (get && n == 3 && parts[0] == "case" && parts[1] == "crossref") return {200, crossref_json(parts[2])};
    if (post && n == 3 && parts[0] == "bn" && parts[2] == "infer") return {200, infer(parts[1], parse_body(body))};
    if (post && n == 3 && parts[0] == "bn" && parts[2] == "ci") return {200, ci(parts[1], parse_body(body))};
    if (get && n == 3 && parts[0] == "ceg" && parts[2] == "paths") return {200, paths_json(served_ceg(parts[1]))};
    if (post && n == 3 && parts[0] == "ceg" && parts[2] == "condition")
      return {200, condition_json(parts[1], parse_body(body))};
    if (get && n == 3 && parts[0] == "wigmore" && parts[2] == "relevance") return {200, relevance(parts[1])};
    if (get && n == 4 && parts[0] == "wigmore" && parts[2] == "chains") return {200, chains(parts[1], parts[3])};
    if (get && n == 3 && parts[0] == "graphs" && parts[2] == "dot") return {200, dot(parts[1])};
    throw NotFound("no route for " + method + " '" + path + "'");
  }

  io::json models_json() const {
    io::json list = io::json::array();
    for (const auto& [id, s] : models_) list.push_back({{"id", id}, {"kind", to_string(s.kind)}, {"case", s.bundle}});
    return {{"models", list}};
  }

  io::json items_json() const {
    io::json list = io::json::array();
    for (const auto& item : primary().items) list.push_back(detail::to_json(item));
    return {{"case", primary().name}, {"items", list}};
  }

  io::json crossref_json(const std::string& number) const {
    io::json refs = io::json::array();
    for (const auto& r : cross_reference(primary(), number)) refs.push_back({{"model", r.model}, {"element", r.element}});
    return {{"item", number}, {"refs", refs}};
  }

  // Body: {"hard": {...}, "soft": {...}, "nodes": [...]}; `nodes` limits the
  // reported marginals.
  io::json infer(const std::string& id, io::json body) const {
    const Served& s = served_net(id);
    io::expect_keys(body, "infer request", {}, {"hard", "soft", "nodes"});
    std::vector<NodeId> only = io::get_or<std::vector<NodeId>>(body, "nodes", {}, "infer request");
    body.erase("nodes");
    EvidenceSet ev = io::evidence_from_json(body);
    for (const auto& v : only) s.net->space(v);
    io::json out = io::to_json(s.junction->posterior(ev), *s.net, only);
    out["model"] = id;
    return out;
  }

  io::json ci(const std::string& id, const io::json& body) const {
    const Served& s = served_net(id);
    const std::string what = "ci request";
    io::expect_keys(body, what, {"a", "b"}, {"given"});
    auto set_of = [&](const char* key) {
      auto v = io::get_or<std::vector<NodeId>>(body, key, {}, what);
      return NodeSet(v.begin(), v.end());
    };
    CiQuery q{set_of("a"), set_of("b"), set_of("given")};
    bool independent = query_ci(s.net->dag(), q);
    return {{"model", id}, {"a", q.a}, {"b", q.b}, {"given", q.c}, {"independent", independent}};
  }

  static io::json paths_array(const Ceg& c) {
    io::json list = io::json::array();
    for (const auto& p : enumerate_paths(c)) list.push_back(io::to_json(p, c));
    return list;
  }

  static io::json paths_json(const Served& s) {
    io::json paths = paths_array(*s.ceg);
    double total = 0.0;
    for (const auto& p : paths) total += p["probability"].get<double>();
    return {{"model", s.id}, {"paths", paths}, {"total_probability", total}};
  }

  io::json condition_json(const std::string& id, const io::json& body) const {
    const Served& s = served_ceg(id);
    PathFilter filter = io::path_filter_from_json(body);
    double kept = 0.0;
    for (const auto& p : enumerate_paths(*s.ceg))
      if (filter(p)) kept += p.probability;
    Ceg conditioned = condition(*s.ceg, filter);
    return {{"model", id},
            {"kept_mass", kept},
            {"position_count", conditioned.positions().size()},
            {"edge_count", conditioned.edges().size()},
            {"paths", paths_array(conditioned)},
            {"ceg", io::to_json(conditioned)}};
  }

  io::json relevance(const std::string& id) const {
    const Served& s = served_chart(id);
    io::json out = io::to_json(relevant_items(*s.chart));
    out["model"] = id;
    out["probandum"] = s.chart->probandum();
    return out;
  }

  io::json chains(const std::string& id, const std::string& node) const {
    const Served& s = served_chart(id);
    if (!s.chart->contains(node)) throw NotFound("chart '" + id + "' has no node '" + node + "'");
    io::json list = io::json::array();
    for (const auto& c : argument_chains(*s.chart, node)) list.push_back(io::to_json(c));
    return {{"model", id}, {"item", node}, {"target", s.chart->probandum()}, {"chains", list}};
  }

  io::json dot(const std::string& id) const {
    const Served& s = served(id);
    std::string text;
    if (s.net) text = to_dot(s.net->dag(), id);
    else if (s.ceg) text = to_dot(*s.ceg, id);
    else text = to_dot(*s.chart, id);
    return {{"id", id}, {"format", "dot"}, {"dot", text}};
  }

  std::vector<CaseBundle> bundles_;
  std::map<std::string, Served> models_;
};

}  // namespace evidentia
