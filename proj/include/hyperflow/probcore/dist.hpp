#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <type_traits>
#include <utility>
#include <vector>

#include "hyperflow/error.hpp"
#include "hyperflow/probcore/rational.hpp"

namespace hyperflow {

/// Finite discrete (sub-)distribution over an ordered key type.
///
/// Entries are kept sorted by key with strictly positive weights, so two
/// distributions are equal exactly when their entry vectors are equal.
/// Distinct key types (visible states, hidden states, joint states, plain
/// values) give distinct distribution types, which keeps them from mixing.
template <class K>
class FiniteDist {
 public:
  using key_type = K;
  using Entry = std::pair<K, Rational>;

  FiniteDist() = default;

  static FiniteDist point(K key) {
    FiniteDist d;
    d.entries_.emplace_back(std::move(key), Rational(1));
    return d;
  }

  /// Equal weight on every listed key; repeated keys accumulate.
  static FiniteDist uniform(const std::vector<K>& keys) {
    if (keys.empty()) throw Error(Errc::ZeroWeight, "uniform distribution over an empty set");
    std::map<K, Rational> acc;
    const Rational w(1, static_cast<long>(keys.size()));
    for (const auto& k : keys) acc[k] += w;
    return from_map(std::move(acc));
  }

  /// Takes ownership of accumulated weights; zero weights are dropped.
  static FiniteDist from_map(std::map<K, Rational> acc) {
    FiniteDist d;
    d.entries_.reserve(acc.size());
    for (auto& [k, w] : acc) {
      if (w < 0) throw Error(Errc::NegativeWeight, "negative weight " + to_string(w));
      if (w != 0) d.entries_.emplace_back(k, std::move(w));
    }
    return d;
  }

  /// Entries must already be sorted by key, unique and positive.
  static FiniteDist from_sorted(std::vector<Entry> entries) {
    FiniteDist d;
    d.entries_ = std::move(entries);
    return d;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  Rational weight() const {
    Rational s = 0;
    for (const auto& e : entries_) s += e.second;
    return s;
  }
  bool is_full() const { return weight() == 1; }

  Rational prob(const K& key) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, const K& k) { return e.first < k; });
    if (it != entries_.end() && it->first == key) return it->second;
    return Rational(0);
  }

  std::vector<K> support() const {
    std::vector<K> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
  }

  Rational max_prob() const {
    Rational m = 0;
    for (const auto& e : entries_)
      if (e.second > m) m = e.second;
    return m;
  }

  FiniteDist scaled(const Rational& factor) const {
    if (factor == 0) return {};
    FiniteDist d = *this;
    for (auto& e : d.entries_) e.second *= factor;
    return d;
  }

  friend bool operator==(const FiniteDist& a, const FiniteDist& b) { return a.entries_ == b.entries_; }

  /// Lexicographic over (key, weight) entries.
  friend std::strong_ordering operator<=>(const FiniteDist& a, const FiniteDist& b) {
    const std::size_t n = std::min(a.entries_.size(), b.entries_.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (auto c = a.entries_[i].first <=> b.entries_[i].first; c != 0) return c;
      if (auto c = compare(a.entries_[i].second, b.entries_[i].second); c != 0) return c;
    }
    return a.entries_.size() <=> b.entries_.size();
  }

 private:
  std::vector<Entry> entries_;
};

/// Accumulates weighted keys and produces a canonical distribution.
template <class K>
class DistBuilder {
 public:
  void add(const K& key, const Rational& w) {
    if (w == 0) return;
    auto [it, inserted] = acc_.try_emplace(key, w);
    if (!inserted) it->second += w;
  }
  void add_all(const FiniteDist<K>& d, const Rational& scale = Rational(1)) {
    for (const auto& [k, w] : d) add(k, w * scale);
  }
  bool empty() const { return acc_.empty(); }
  FiniteDist<K> build() { return FiniteDist<K>::from_map(std::move(acc_)); }

 private:
  std::map<K, Rational> acc_;
};

/// Canonical distribution from (key, weight) pairs; duplicates add up.
template <class K>
FiniteDist<K> mk_dist(const std::vector<std::pair<K, Rational>>& pairs) {
  std::map<K, Rational> acc;
  Rational total = 0;
  for (const auto& [k, w] : pairs) {
    if (w < 0) throw Error(Errc::NegativeWeight, "weight " + to_string(w) + " is negative");
    acc[k] += w;
    total += w;
  }
  if (total > 1) throw Error(Errc::WeightOverflow, "weights sum to " + to_string(total));
  return FiniteDist<K>::from_map(std::move(acc));
}

template <class K>
FiniteDist<K> normalize(const FiniteDist<K>& d) {
  const Rational w = d.weight();
  if (w == 0) throw Error(Errc::ZeroWeight, "cannot normalize a distribution of weight 0");
  if (w == 1) return d;
  return d.scaled(Rational(1) / w);
}

namespace detail {

template <class T>
struct is_finite_dist : std::false_type {};
template <class K>
struct is_finite_dist<FiniteDist<K>> : std::true_type {};

template <class R>
Rational as_weight(const R& r) {
  if constexpr (std::is_same_v<R, bool>)
    return Rational(r ? 1 : 0);
  else
    return Rational(r);
}

}  // namespace detail

/// Sum over the support of d.x * f(x). When f yields distributions the
/// result is their weighted mixture; booleans count as 0 or 1.
template <class K, class F>
auto expected_value(const FiniteDist<K>& d, F&& f) {
  using R = std::decay_t<std::invoke_result_t<F&, const K&>>;
  if constexpr (detail::is_finite_dist<R>::value) {
    DistBuilder<typename R::key_type> b;
    for (const auto& [k, w] : d) b.add_all(f(k), w);
    return b.build();
  } else {
    Rational s = 0;
    for (const auto& [k, w] : d) s += w * detail::as_weight(f(k));
    return s;
  }
}

/// Conditioning of d on a weight function: E[w * point] / E[w].
template <class K, class W>
FiniteDist<K> posterior(const FiniteDist<K>& d, W&& weight_fn) {
  std::vector<typename FiniteDist<K>::Entry> out;
  Rational total = 0;
  for (const auto& [k, w] : d) {
    Rational x = detail::as_weight(weight_fn(k));
    if (x < 0) throw Error(Errc::NegativeWeight, "conditioning weight is negative");
    if (x == 0) continue;
    Rational m = w * x;
    total += m;
    out.emplace_back(k, std::move(m));
  }
  if (total == 0) throw Error(Errc::ZeroCondition, "all conditioning weights vanish");
  for (auto& e : out) e.second /= total;
  return FiniteDist<K>::from_sorted(std::move(out));
}

}  // namespace hyperflow
