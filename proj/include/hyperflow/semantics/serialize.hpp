#pragma once

#include "json.hpp"

#include "hyperflow/semantics/hyper.hpp"

namespace hyperflow::semantics {

inline nlohmann::ordered_json state_json(const Layout& l, bool visible, std::uint64_t code) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  const auto vals = l.values(visible, code);
  for (std::size_t i = 0; i < vals.size(); ++i) out[l.part(visible)[i].name] = to_string(vals[i]);
  return out;
}

/// {"hyper":[{"p":..,"v":{..},"delta":[{"h":{..},"p":..},..]},..]} in canonical order.
inline nlohmann::ordered_json to_json(const HyperDist& h) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& [s, w] : h.outer) {
    nlohmann::ordered_json delta = nlohmann::ordered_json::array();
    for (const auto& [k, p] : s.delta)
      delta.push_back({{"h", state_json(*h.layout, false, k.code)}, {"p", to_string(p)}});
    arr.push_back({{"p", to_string(w)}, {"v", state_json(*h.layout, true, s.v.code)}, {"delta", delta}});
  }
  return {{"hyper", arr}};
}

}  // namespace hyperflow::semantics
