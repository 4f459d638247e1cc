#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "hyperflow/semantics/hyper.hpp"

namespace hyperflow::refine {

using semantics::HKey;
using semantics::HyperDist;
using semantics::VKey;

/// Sub-distribution over hidden states.
using Fraction = FiniteDist<HKey>;

/// Canonical fraction order: entries compared key by key, and on a shared
/// key the heavier entry first; a prefix sorts before its extensions.
inline bool fraction_less(const Fraction& a, const Fraction& b) {
  const auto& x = a.entries();
  const auto& y = b.entries();
  const std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i].first != y[i].first) return x[i].first < y[i].first;
    if (x[i].second != y[i].second) return x[i].second > y[i].second;
  }
  return x.size() < y.size();
}

/// Multiset of fractions for one visible value, kept in canonical order.
struct Partition {
  std::vector<Fraction> fractions;

  std::size_t size() const { return fractions.size(); }
  bool empty() const { return fractions.empty(); }
  Rational weight() const {
    Rational w = 0;
    for (const auto& f : fractions) w += f.weight();
    return w;
  }
  void sort() { std::sort(fractions.begin(), fractions.end(), fraction_less); }

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Fractions p * delta of the split-states of d with visible part v.
inline Partition extract_partition(const HyperDist& d, VKey v) {
  Partition out;
  for (const auto& [s, w] : d.outer)
    if (s.v == v) out.fractions.push_back(s.delta.scaled(w));
  out.sort();
  return out;
}

/// Sums similar fractions (equal normalizations) and drops zero ones.
inline Partition reduce_partition(const Partition& p) {
  std::map<Fraction, Rational> groups;  // normalization -> total weight
  for (const auto& f : p.fractions) {
    const Rational w = f.weight();
    if (w == 0) continue;
    groups[normalize(f)] += w;
  }
  Partition out;
  for (const auto& [n, w] : groups) out.fractions.push_back(n.scaled(w));
  out.sort();
  return out;
}

inline bool similar(const Partition& a, const Partition& b) { return reduce_partition(a) == reduce_partition(b); }

/// Sum over fractions of their largest probability.
inline Rational bv_partition(const Partition& p) {
  Rational s = 0;
  for (const auto& f : p.fractions) s += f.max_prob();
  return s;
}

/// Visible values occurring in either hyper-distribution, ascending.
inline std::vector<VKey> visible_values(const HyperDist& a, const HyperDist& b) {
  std::vector<VKey> out;
  for (const auto* d : {&a, &b})
    for (const auto& [s, w] : d->outer) out.push_back(s.v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Hidden states carrying weight in either partition, ascending.
inline std::vector<HKey> support_columns(const Partition& a, const Partition& b) {
  std::vector<HKey> out;
  for (const auto* p : {&a, &b})
    for (const auto& f : p->fractions)
      for (const auto& [h, w] : f) out.push_back(h);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::string fraction_text(const semantics::Layout& l, const Fraction& f) {
  std::string s = "{";
  bool first = true;
  for (const auto& [h, w] : f) {
    s += (first ? "" : ", ") + l.text(false, h.code) + " @ " + to_string(w);
    first = false;
  }
  return s + "}";
}

/// Text of a visible value: the bare value for a single visible variable.
inline std::string v_label(const semantics::Layout& l, VKey v) {
  const auto vals = l.values(true, v.code);
  if (vals.size() == 1) return to_string(vals.front());
  return l.text(true, v.code);
}

}  // namespace hyperflow::refine
