#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "evidentia/service_http.hpp"
#include "support/json_schema.hpp"

using namespace evidentia;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::path(EVIDENTIA_SOURCE_DIR);

const Service& service() {
  static const Service s({load_case_bundle(kRoot / "data" / "kercher")});
  return s;
}

void expect_schema(const std::string& name, const io::json& doc) {
  schema::Validator v(io::read_json_file(kRoot / "schemas" / (name + ".schema.json")));
  auto errors = v.check(doc);
  EXPECT_TRUE(errors.empty()) << name << ": " << (errors.empty() ? "" : errors.front()) << "\n" << doc.dump();
}

ApiResponse get(const std::string& path) { return service().handle("GET", kApiPrefix + path, ""); }
ApiResponse post(const std::string& path, const std::string& body) {
  return service().handle("POST", kApiPrefix + path, body);
}

void expect_error(const ApiResponse& r, int status, const std::string& kind) {
  EXPECT_EQ(r.status, status) << r.body.dump();
  expect_schema("api-error", r.body);
  EXPECT_EQ(r.body["error"]["kind"], kind);
}

}  // namespace

TEST(Service, ModelsAndItems) {
  auto r = get("/models");
  ASSERT_EQ(r.status, 200);
  expect_schema("api-models", r.body);
  EXPECT_EQ(r.body["models"].size(), 6u);

  r = get("/case/items");
  ASSERT_EQ(r.status, 200);
  expect_schema("api-items", r.body);

  r = get("/case/items/24");
  ASSERT_EQ(r.status, 200);
  expect_schema("item", r.body);
  EXPECT_EQ(r.body["number"], "24");

  r = get("/case/crossref/41");
  ASSERT_EQ(r.status, 200);
  expect_schema("crossref", r.body);
}

TEST(Service, Infer) {
  auto r = post("/bn/testimony41/infer", R"({"hard": {"41": "true"}})");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  expect_schema("posterior", r.body);
  EXPECT_NEAR(r.body["marginals"]["40"]["true"].get<double>(), 0.45 / 0.55, 1e-9);
  EXPECT_NEAR(r.body["evidence_probability"].get<double>(), 0.55, 1e-12);

  r = post("/bn/kercher-oobn/infer", R"({"hard": {"22, 41 & 43.41": "true"}, "nodes": ["S knife used?"]})");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  expect_schema("posterior", r.body);
  EXPECT_EQ(r.body["marginals"].size(), 1u);

  r = post("/bn/testimony41/infer", "");
  EXPECT_EQ(r.status, 200);
}

TEST(Service, Ci) {
  auto r = post("/bn/kercher-bn/ci", R"({"a": ["19"], "b": ["25a"], "given": ["S knife used?"]})");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  expect_schema("api-ci", r.body);
  r = post("/bn/testimony41/ci", R"({"a": ["40"], "b": ["41"]})");
  EXPECT_FALSE(r.body["independent"].get<bool>());
}

TEST(Service, CegAndWigmore) {
  auto r = get("/ceg/knife-ceg/paths");
  ASSERT_EQ(r.status, 200);
  expect_schema("ceg-paths", r.body);
  EXPECT_EQ(r.body["paths"].size(), 4u);

  r = post("/ceg/knife-ceg/condition", R"({"require": ["D"]})");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  expect_schema("ceg-condition", r.body);
  EXPECT_NEAR(r.body["kept_mass"].get<double>(), 0.3, 1e-12);

  r = get("/wigmore/kercher-chart/relevance");
  ASSERT_EQ(r.status, 200);
  expect_schema("relevance", r.body);

  r = get("/wigmore/kercher-chart/chains/34");
  ASSERT_EQ(r.status, 200);
  expect_schema("chains", r.body);

  for (const char* id : {"kercher-bn", "knife-ceg", "kercher-chart"}) {
    r = get(std::string("/graphs/") + id + "/dot");
    ASSERT_EQ(r.status, 200);
    expect_schema("dot", r.body);
  }
}

TEST(Service, ErrorStatuses) {
  expect_error(get("/nope"), 404, "NotFound");
  expect_error(service().handle("GET", "/elsewhere", ""), 404, "NotFound");
  expect_error(get("/case/items/99"), 404, "UnknownItem");
  expect_error(post("/bn/missing/infer", "{}"), 404, "NotFound");
  expect_error(post("/bn/knife-ceg/infer", "{}"), 404, "NotFound");
  expect_error(get("/wigmore/kercher-chart/chains/nosuch"), 404, "NotFound");
  expect_error(post("/bn/testimony41/infer", "{not json"), 400, "ParseError");
  expect_error(post("/bn/testimony41/infer", R"({"surprise": 1})"), 400, "ParseError");
  expect_error(post("/bn/testimony41/infer", R"({"hard": {"41": "maybe"}})"), 422, "UnknownState");
  expect_error(post("/ceg/knife-ceg/condition", R"({"require": ["S1", "S2"]})"), 422, "NoSurvivingPath");
  expect_error(post("/bn/testimony41/ci", R"({"a": ["40"], "b": ["40"]})"), 422, "InvalidQuery");
}

TEST(Service, Stateless) {
  std::vector<std::tuple<std::string, std::string, std::string>> batch = {
      {"POST", "/bn/kercher-bn/infer", R"({"hard": {"19": "true", "47": "false"}})"},
      {"POST", "/ceg/kercher-ceg/condition", R"({"through": ["w1"]})"},
      {"GET", "/wigmore/kercher-chart/relevance", ""},
      {"POST", "/bn/testimony41/infer", R"({"hard": {"41": "maybe"}})"},
      {"GET", "/case/items", ""},
  };
  auto run_batch = [&] {
    std::vector<std::string> out;
    for (const auto& [m, p, b] : batch) {
      auto r = service().handle(m, kApiPrefix + p, b);
      out.push_back(std::to_string(r.status) + r.body.dump());
    }
    return out;
  };
  auto first = run_batch();
  // Interleave unrelated traffic, then repeat.
  post("/bn/kercher-bn/infer", R"({"hard": {"S knife used?": "false"}})");
  post("/ceg/knife-ceg/condition", R"({"exclude": ["D"]})");
  EXPECT_EQ(run_batch(), first);

  std::vector<std::future<std::vector<std::string>>> futures;
  for (int t = 0; t < 4; ++t) futures.push_back(std::async(std::launch::async, run_batch));
  for (auto& f : futures) EXPECT_EQ(f.get(), first);
}

TEST(Service, RejectsInvalidBundle) {
  CaseBundle b = load_case_bundle(kRoot / "data" / "kercher");
  b.crossref["41"].push_back({"kercher-bn", "no such node"});
  EXPECT_THROW(Service({b}), SubmodelInvalid);
}

TEST(ServiceHttp, BindParsing) {
  EXPECT_EQ(parse_bind("127.0.0.1:9000"), (std::pair<std::string, int>{"127.0.0.1", 9000}));
  EXPECT_THROW(parse_bind("nohost"), Error);
}

TEST(ServiceHttp, LiveRoundTrip) {
  httplib::Server server;
  mount(server, service(), ServeOptions{"", true, ""});
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/api/v1/bn/testimony41/infer", R"({"hard": {"41": "true"}})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  io::json body = io::json::parse(res->body);
  EXPECT_NEAR(body["marginals"]["40"]["true"].get<double>(), 0.45 / 0.55, 1e-9);
  auto missing = client.Get("/api/v1/models/none");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  server.stop();
  t.join();
}
