#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evidentia/io/common.hpp"
#include "evidentia/wigmore.hpp"

namespace evidentia::io {

inline WigmoreChart chart_from_json(const json& j) {
  const std::string what = "chart";
  expect_keys(j, what, {"probandum", "nodes", "edges"}, {"format_version", "metadata"});
  check_version(j, what);
  std::vector<ChartNode> nodes;
  for (const auto& n : array_at(j, "nodes", what)) {
    expect_keys(n, "chart node", {"id", "kind"}, {"text", "item_ref", "source"});
    ChartNode node;
    node.id = get<std::string>(n, "id", "chart node");
    node.kind = node_kind_from(get<std::string>(n, "kind", "chart node"));
    node.text = get_or<std::string>(n, "text", "", "chart node");
    if (n.contains("item_ref")) node.item_ref = get<std::string>(n, "item_ref", "chart node");
    if (n.contains("source")) node.source = get<std::string>(n, "source", "chart node");
    nodes.push_back(std::move(node));
  }
  std::vector<ChartEdge> edges;
  for (const auto& e : array_at(j, "edges", what)) {
    expect_keys(e, "chart edge", {"from", "to"}, {"polarity"});
    edges.push_back({get<std::string>(e, "from", "chart edge"), get<std::string>(e, "to", "chart edge"),
                     polarity_from(get_or<std::string>(e, "polarity", "supports", "chart edge"))});
  }
  return build_chart(std::move(nodes), std::move(edges), get<std::string>(j, "probandum", what));
}

inline json to_json(const WigmoreChart& c) {
  json nodes = json::array(), edges = json::array();
  for (const auto& [_, n] : c.nodes()) {
    json jn = {{"id", n.id}, {"kind", to_string(n.kind)}, {"text", n.text}};
    if (n.item_ref) jn["item_ref"] = *n.item_ref;
    if (n.source) jn["source"] = *n.source;
    nodes.push_back(jn);
  }
  for (const auto& e : c.edges()) edges.push_back({{"from", e.from}, {"to", e.to}, {"polarity", to_string(e.polarity)}});
  return {{"format_version", kFormatVersion}, {"probandum", c.probandum()}, {"nodes", nodes}, {"edges", edges}};
}

inline json to_json(const Relevance& r) { return {{"relevant", r.relevant}, {"irrelevant", r.irrelevant}}; }

inline json to_json(const ArgumentChain& chain) {
  json pol = json::array();
  for (auto p : chain.polarities) pol.push_back(to_string(p));
  return {{"nodes", chain.nodes}, {"polarities", pol}};
}

}  // namespace evidentia::io
