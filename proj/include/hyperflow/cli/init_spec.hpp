#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hyperflow/semantics/hyper.hpp"

namespace hyperflow::cli {

using semantics::HKey;
using semantics::Layout;
using semantics::SplitState;

/// Prior of one hidden variable (or of all unmentioned ones, under `*`).
struct Prior {
  enum class Kind { Point, Uniform, Explicit, Points, Sample };
  Kind kind = Kind::Uniform;
  std::string value;                                         // Point
  std::vector<std::pair<std::string, Rational>> weights;     // Explicit
  std::size_t samples = 0;                                   // Sample
};

/// `v=bot; h~uniform; g~{1@1/4,2@3/4}; k~sample:5; *~points`
struct InitSpec {
  std::map<std::string, std::string> visible;
  std::map<std::string, Prior> hidden;
  std::optional<Prior> rest;
  std::uint64_t seed = 1;
};

struct InitPoint {
  std::string label;
  SplitState state;
};

namespace detail {

inline std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '{') ++depth;
    if (c == '}') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline Prior parse_prior(std::string_view text) {
  Prior p;
  const std::string t(hyperflow::detail::trim(text));
  if (t == "uniform") {
    p.kind = Prior::Kind::Uniform;
  } else if (t == "points") {
    p.kind = Prior::Kind::Points;
  } else if (t.rfind("sample:", 0) == 0) {
    p.kind = Prior::Kind::Sample;
    const std::string n(hyperflow::detail::trim(std::string_view(t).substr(7)));
    if (n.empty() || !hyperflow::detail::all_digits(n) || n.size() > 6 || std::stoul(n) == 0)
      throw Error(Errc::InvalidArgument, "sample count must be a positive integer in '" + t + "'");
    p.samples = std::stoul(n);
  } else if (t.size() >= 2 && t.front() == '{' && t.back() == '}') {
    p.kind = Prior::Kind::Explicit;
    for (const auto& item : split_top(std::string_view(t).substr(1, t.size() - 2), ',')) {
      const auto at = item.find('@');
      if (at == std::string::npos) throw Error(Errc::InvalidArgument, "expected value@weight in '" + item + "'");
      p.weights.emplace_back(std::string(hyperflow::detail::trim(std::string_view(item).substr(0, at))),
                             parse_rational(std::string_view(item).substr(at + 1)));
    }
  } else {
    throw Error(Errc::InvalidArgument, "unknown prior '" + t + "'");
  }
  return p;
}

/// Index of the domain value spelled `text`.
inline std::uint32_t domain_index(const semantics::VarInfo& v, const std::string& text) {
  for (std::size_t i = 0; i < v.domain.size(); ++i) {
    const Value& d = v.domain[i];
    if (to_string(d) == text) return static_cast<std::uint32_t>(i);
    if (d.is_number()) {
      try {
        if (parse_rational(text) == d.as_number()) return static_cast<std::uint32_t>(i);
      } catch (const Error&) {
      }
    }
  }
  throw Error(Errc::ValueOutOfDomain, "'" + text + "' is not in the domain of '" + v.name + "'");
}

/// Distribution over digit tuples of a group of hidden variables.
using Factor = std::map<std::vector<std::uint32_t>, Rational>;

inline std::vector<std::vector<std::uint32_t>> all_tuples(const Layout& l, const std::vector<std::size_t>& vars) {
  std::vector<std::vector<std::uint32_t>> out{{}};
  for (std::size_t v : vars) {
    std::vector<std::vector<std::uint32_t>> next;
    for (const auto& t : out)
      for (std::uint32_t k = 0; k < l.hidden()[v].domain.size(); ++k) {
        next.push_back(t);
        next.back().push_back(k);
      }
    out = std::move(next);
  }
  return out;
}

/// Alternatives for a group of hidden variables, each with a label suffix.
inline std::vector<std::pair<std::string, Factor>> alternatives(const Layout& l, const std::vector<std::size_t>& vars,
                                                                const Prior& p, std::mt19937_64& rng) {
  constexpr std::size_t kMaxTuples = std::size_t{1} << 16;
  std::vector<std::pair<std::string, Factor>> out;
  auto tuples = [&] {
    auto ts = all_tuples(l, vars);
    if (ts.size() > kMaxTuples) throw Error(Errc::UnsupportedConstruct, "too many hidden states to enumerate");
    return ts;
  };
  switch (p.kind) {
    case Prior::Kind::Point: {
      out.push_back({"", Factor{{{domain_index(l.hidden()[vars.at(0)], p.value)}, Rational(1)}}});
      break;
    }
    case Prior::Kind::Uniform: {
      const auto ts = tuples();
      Factor f;
      for (const auto& t : ts) f[t] = Rational(1, static_cast<long>(ts.size()));
      out.push_back({"uniform", std::move(f)});
      break;
    }
    case Prior::Kind::Explicit: {
      Factor f;
      Rational total = 0;
      for (const auto& [v, w] : p.weights) {
        if (w < 0) throw Error(Errc::NegativeWeight, "negative prior weight for '" + v + "'");
        if (w == 0) continue;
        f[{domain_index(l.hidden()[vars.at(0)], v)}] += w;
        total += w;
      }
      if (total != 1) throw Error(Errc::DistNotOneSumming, "explicit prior sums to " + to_string(total));
      out.push_back({"explicit", std::move(f)});
      break;
    }
    case Prior::Kind::Points: {
      for (const auto& t : tuples()) out.push_back({"point#" + std::to_string(out.size()), Factor{{t, Rational(1)}}});
      break;
    }
    case Prior::Kind::Sample: {
      const auto ts = tuples();
      std::uniform_int_distribution<int> weight(0, 9);
      for (std::size_t n = 0; n < p.samples; ++n) {
        std::vector<int> ws(ts.size());
        int total = 0;
        while (total == 0) {
          total = 0;
          for (auto& w : ws) total += (w = weight(rng));
        }
        Factor f;
        for (std::size_t k = 0; k < ts.size(); ++k)
          if (ws[k] != 0) f[ts[k]] = Rational(ws[k], total);
        out.push_back({"sample#" + std::to_string(n), std::move(f)});
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

inline InitSpec parse_init_spec(std::string_view text, std::uint64_t seed = 1) {
  InitSpec spec;
  spec.seed = seed;
  for (const auto& raw : detail::split_top(text, ';')) {
    const std::string item(hyperflow::detail::trim(raw));
    if (item.empty()) continue;
    const auto tilde = item.find('~');
    const auto eq = item.find('=');
    if (tilde != std::string::npos && (eq == std::string::npos || tilde < eq)) {
      const std::string name(hyperflow::detail::trim(std::string_view(item).substr(0, tilde)));
      Prior p = detail::parse_prior(std::string_view(item).substr(tilde + 1));
      if (name == "*") {
        if (p.kind == Prior::Kind::Explicit) throw Error(Errc::InvalidArgument, "'*' takes uniform, points or sample:N");
        spec.rest = std::move(p);
      } else if (!spec.hidden.emplace(name, std::move(p)).second) {
        throw Error(Errc::InvalidArgument, "'" + name + "' is given twice");
      }
    } else if (eq != std::string::npos) {
      const std::string name(hyperflow::detail::trim(std::string_view(item).substr(0, eq)));
      const std::string value(hyperflow::detail::trim(std::string_view(item).substr(eq + 1)));
      if (name.empty() || value.empty()) throw Error(Errc::InvalidArgument, "malformed assignment '" + item + "'");
      if (!spec.visible.emplace(name, value).second) throw Error(Errc::InvalidArgument, "'" + name + "' is given twice");
    } else {
      throw Error(Errc::InvalidArgument, "expected 'name=value' or 'name~prior' in '" + item + "'");
    }
  }
  return spec;
}

/// All initial split-states an InitSpec names over a layout: the product of the
/// alternatives of each hidden group, in a fixed order.
inline std::vector<InitPoint> expand(const InitSpec& spec, const Layout& l) {
  std::vector<std::uint32_t> vdigits;
  std::vector<std::string> label_parts;
  std::map<std::string, std::string> hidden_points;
  for (const auto& [name, value] : spec.visible) {
    const auto where = l.find(name);
    if (!where) throw Error(Errc::UndeclaredVariable, "'" + name + "' is not declared");
    if (!where->first) hidden_points.emplace(name, value);
  }
  for (const auto& v : l.visible()) {
    auto it = spec.visible.find(v.name);
    if (it == spec.visible.end()) throw Error(Errc::InvalidArgument, "no initial value for visible '" + v.name + "'");
    vdigits.push_back(detail::domain_index(v, it->second));
    label_parts.push_back(v.name + "=" + it->second);
  }
  for (const auto& [name, p] : spec.hidden) {
    const auto where = l.find(name);
    if (!where) throw Error(Errc::UndeclaredVariable, "'" + name + "' is not declared");
    if (where->first) throw Error(Errc::InvalidArgument, "'" + name + "' is visible; give it a value with '='");
  }

  std::mt19937_64 rng(spec.seed);
  struct Group {
    std::vector<std::size_t> vars;
    std::vector<std::pair<std::string, detail::Factor>> alts;
    std::string name;
  };
  std::vector<Group> groups;
  std::vector<std::size_t> rest;
  for (std::size_t k = 0; k < l.hidden().size(); ++k) {
    const auto& name = l.hidden()[k].name;
    Prior p;
    if (auto it = hidden_points.find(name); it != hidden_points.end()) {
      p.kind = Prior::Kind::Point;
      p.value = it->second;
    } else if (auto jt = spec.hidden.find(name); jt != spec.hidden.end()) {
      p = jt->second;
    } else if (spec.rest) {
      rest.push_back(k);
      continue;
    } else {
      throw Error(Errc::InvalidArgument, "no prior for hidden '" + name + "'");
    }
    groups.push_back({{k}, detail::alternatives(l, {k}, p, rng), name});
  }
  if (!rest.empty()) groups.push_back({rest, detail::alternatives(l, rest, *spec.rest, rng), "*"});

  std::vector<InitPoint> out;
  std::vector<std::size_t> pick(groups.size(), 0);
  const std::string vlabel = [&] {
    std::string s;
    for (std::size_t k = 0; k < label_parts.size(); ++k) s += (k ? "; " : "") + label_parts[k];
    return s;
  }();
  while (true) {
    std::map<std::vector<std::uint32_t>, Rational> joint{{std::vector<std::uint32_t>(l.hidden().size(), 0), Rational(1)}};
    std::string label = vlabel;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& [suffix, f] = groups[g].alts[pick[g]];
      if (!suffix.empty()) label += (label.empty() ? "" : "; ") + groups[g].name + "~" + suffix;
      std::map<std::vector<std::uint32_t>, Rational> next;
      for (const auto& [digits, p] : joint)
        for (const auto& [t, q] : f) {
          auto d = digits;
          for (std::size_t k = 0; k < t.size(); ++k) d[groups[g].vars[k]] = t[k];
          next[d] += p * q;
        }
      joint = std::move(next);
    }
    for (const auto& [name, value] : hidden_points) label += (label.empty() ? "" : "; ") + name + "=" + value;
    DistBuilder<HKey> b;
    for (const auto& [digits, p] : joint) b.add(HKey{l.encode(false, digits)}, p);
    out.push_back({label, SplitState{semantics::VKey{l.encode(true, vdigits)}, b.build()}});
    std::size_t g = 0;
    for (; g < groups.size() && ++pick[g] == groups[g].alts.size(); ++g) pick[g] = 0;
    if (g == groups.size()) break;
  }
  return out;
}

}  // namespace hyperflow::cli
