#pragma once

#include <cstdio>
#include <map>
#include <sstream>
#include <string>

#include "evidentia/ceg.hpp"
#include "evidentia/graph.hpp"
#include "evidentia/wigmore.hpp"

namespace evidentia {

namespace detail {

// Ids are emitted verbatim inside double quotes; only quotes and
// backslashes are escaped.
inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string format_probability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", p);
  return buf;
}

inline const char* stage_colour(std::size_t i) {
  static const char* palette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
                                  "#ffff33", "#a65628", "#f781bf", "#999999", "#66c2a5",
                                  "#fc8d62", "#8da0cb", "#e78ac3", "#a6d854", "#ffd92f"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

}  // namespace detail

inline std::string to_dot(const Dag& g, const std::string& name = "G") {
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(name) << " {\n";
  for (const auto& v : g.nodes()) os << "  " << detail::dot_quote(v) << ";\n";
  for (const auto& e : g.edges()) os << "  " << detail::dot_quote(e.tail) << " -> " << detail::dot_quote(e.head) << ";\n";
  os << "}\n";
  return os.str();
}

inline std::string to_dot(const UGraph& u, const std::string& name = "G") {
  std::ostringstream os;
  os << "graph " << detail::dot_quote(name) << " {\n";
  for (const auto& v : u.nodes()) os << "  " << detail::dot_quote(v) << ";\n";
  for (const auto& [a, b] : u.arcs()) os << "  " << detail::dot_quote(a) << " -- " << detail::dot_quote(b) << ";\n";
  os << "}\n";
  return os.str();
}

// Stage colours become fill colours; edge labels carry the probability.
inline std::string to_dot(const Ceg& c, const std::string& name = "CEG") {
  std::map<std::string, std::size_t> colour_index;
  for (const auto& p : c.positions())
    if (!p.stage.empty()) colour_index.emplace(p.stage, 0);
  std::size_t next = 0;
  for (auto& [_, i] : colour_index) i = next++;

  std::ostringstream os;
  os << "digraph " << detail::dot_quote(name) << " {\n  rankdir=LR;\n";
  for (const auto& p : c.positions()) {
    os << "  " << detail::dot_quote(p.id);
    if (p.id == c.sink())
      os << " [shape=doublecircle]";
    else
      os << " [style=filled, fillcolor=" << detail::dot_quote(detail::stage_colour(colour_index[p.stage]))
         << ", stage=" << detail::dot_quote(p.stage) << "]";
    os << ";\n";
  }
  for (const auto& e : c.edges()) {
    std::string head = detail::dot_quote((e.evidence ? "E: " : "") + e.label);
    head.pop_back();
    os << "  " << detail::dot_quote(e.tail) << " -> " << detail::dot_quote(e.head) << " [label=" << head << "\\n"
       << detail::format_probability(e.probability) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

// Arrows point towards the probandum; opposing edges are dashed.
inline std::string to_dot(const WigmoreChart& chart, const std::string& name = "Wigmore") {
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(name) << " {\n  rankdir=BT;\n";
  for (const auto& [id, n] : chart.nodes()) {
    const char* shape = "box";
    switch (n.kind) {
      case NodeKind::probandum: shape = "doubleoctagon"; break;
      case NodeKind::subprobandum: shape = "octagon"; break;
      case NodeKind::testimony: shape = "box"; break;
      case NodeKind::evidence: shape = "circle"; break;
      case NodeKind::inference_step: shape = "diamond"; break;
    }
    os << "  " << detail::dot_quote(id) << " [shape=" << shape << ", kind=" << detail::dot_quote(to_string(n.kind))
       << "];\n";
  }
  for (const auto& e : chart.edges()) {
    os << "  " << detail::dot_quote(e.from) << " -> " << detail::dot_quote(e.to);
    if (e.polarity == Polarity::opposes) os << " [style=dashed]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace evidentia
