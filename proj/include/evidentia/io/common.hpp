#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "evidentia/error.hpp"

namespace evidentia::io {

using json = nlohmann::json;

inline constexpr const char* kFormatVersion = "1";

// Rejects non-objects, unknown keys and missing required keys.
inline void expect_keys(const json& j, const std::string& what, std::initializer_list<const char*> required,
                        std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw ParseError(what + ": expected a JSON object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!j.contains(k)) throw ParseError(what + ": missing key '" + k + "'");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ParseError(what + ": unknown key '" + key + "'");
}

inline void check_version(const json& j, const std::string& what) {
  if (!j.contains("format_version")) return;
  if (!j["format_version"].is_string() || j["format_version"].get<std::string>() != kFormatVersion)
    throw ParseError(what + ": unsupported format_version (expected \"" + kFormatVersion + "\")");
}

template <typename T>
T get(const json& j, const char* key, const std::string& what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(what + ": bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& what) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, what);
}

inline const json& array_at(const json& j, const char* key, const std::string& what) {
  const json& a = j.at(key);
  if (!a.is_array()) throw ParseError(what + ": '" + key + "' must be an array");
  return a;
}

inline json parse_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str(), path.string());
}

// Stable two-space indentation and a trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << dump(j);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline json report_to_json(const ValidationReport& report) {
  json findings = json::array();
  for (const auto& f : report) findings.push_back({{"code", f.code}, {"subject", f.subject}, {"message", f.message}});
  return findings;
}

}  // namespace evidentia::io
