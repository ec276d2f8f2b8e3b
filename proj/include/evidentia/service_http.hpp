#pragma once

#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <string>

#include <httplib.h>

#include "evidentia/service.hpp"

namespace evidentia {

inline constexpr const char* kDefaultBind = "127.0.0.1:8080";

struct ServeOptions {
  std::string bind;  // host:port; empty means EVIDENTIA_BIND or the default
  bool dev = false;  // permissive CORS for local UI development
  std::string ui_dir;
};

inline std::pair<std::string, int> parse_bind(const std::string& bind) {
  auto colon = bind.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == bind.size())
    throw ParseError("bind address must look like host:port, got '" + bind + "'");
  try {
    std::size_t used = 0;
    int port = std::stoi(bind.substr(colon + 1), &used);
    if (used != bind.size() - colon - 1 || port < 0 || port > 65535) throw std::out_of_range("port");
    return {bind.substr(0, colon), port};
  } catch (const std::logic_error&) {
    throw ParseError("bad port in bind address '" + bind + "'");
  }
}

inline std::string resolve_bind(const ServeOptions& opts) {
  if (!opts.bind.empty()) return opts.bind;
  if (const char* env = std::getenv("EVIDENTIA_BIND"); env && *env) return env;
  return kDefaultBind;
}

// Routes every /api/v1 request through `service`. The service must outlive
// the server.
inline void mount(httplib::Server& server, const Service& service, const ServeOptions& opts) {
  auto handler = [&service, dev = opts.dev](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
    if (dev) res.set_header("Access-Control-Allow-Origin", "*");
  };
  const std::string pattern = kApiPrefix + "/.*";
  server.Get(pattern, handler);
  server.Post(pattern, handler);
  if (opts.dev) {
    server.Options(pattern, [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
  }
  if (!opts.ui_dir.empty()) {
    if (!std::filesystem::is_directory(opts.ui_dir)) throw IoError("UI directory '" + opts.ui_dir + "' not found");
    server.set_mount_point("/", opts.ui_dir);
  }
}

// Blocks until the server stops.
inline int serve(const Service& service, const ServeOptions& opts, std::ostream& log) {
  auto [host, port] = parse_bind(resolve_bind(opts));
  httplib::Server server;
  mount(server, service, opts);
  if (port == 0) {
    port = server.bind_to_any_port(host);
    if (port <= 0) throw IoError("cannot bind " + host);
  } else if (!server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  log << "serving " << service.bundles().size() << " bundle(s) on http://" << host << ":" << port << kApiPrefix
      << "\n";
  log.flush();
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace evidentia
