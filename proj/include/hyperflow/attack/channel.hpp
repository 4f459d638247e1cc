#pragma once

#include <algorithm>
#include <vector>

#include "hyperflow/attack/direction.hpp"

namespace hyperflow::attack {

using semantics::VKey;

constexpr std::uint64_t kMaxChannelRows = std::uint64_t{1} << 16;

/// Stochastic channel from incoming hidden states to outgoing columns.
/// Columns of `d`: the zero column first when present, then one column per
/// target fraction. `split` > 1 spreads the zero column over that many fresh
/// values in the emitted program.
struct AttackChannel {
  VKey trigger;
  std::vector<HKey> rows;
  std::vector<bool> relevant;
  RatMatrix d;
  bool has_zero = false;
  std::size_t split = 1;
  std::size_t targets = 0;

  std::size_t extra_columns() const { return has_zero ? split : 0; }

  /// `d` with the zero column replaced by `split` equal columns.
  RatMatrix expanded() const {
    if (!has_zero || split <= 1) return d;
    RatMatrix out(d.rows(), split + targets);
    for (std::size_t i = 0; i < d.rows(); ++i) {
      for (std::size_t k = 0; k < split; ++k) out(i, k) = d(i, 0) / Rational(static_cast<long>(split));
      for (std::size_t j = 0; j < targets; ++j) out(i, split + j) = d(i, 1 + j);
    }
    return out;
  }

  /// Every relevant row is nonnegative and sums to exactly 1.
  bool rows_valid() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!relevant[i]) continue;
      Rational s = 0;
      for (std::size_t j = 0; j < d.cols(); ++j) {
        if (d(i, j) < 0) return false;
        s += d(i, j);
      }
      if (s != 1) return false;
    }
    return true;
  }
};

namespace detail {

inline Rational ceil_div(const Rational& a, const Rational& b) {
  const Rational q = a / b;
  BigInt n = numerator(q) / denominator(q);
  if (Rational(n) < q) n += 1;
  return Rational(n);
}

/// Sub-distribution over the columns of m after passing the fraction through it.
inline std::vector<Rational> push_through(const RatMatrix& m, const refine::Fraction& f) {
  std::vector<Rational> out(m.cols(), Rational(0));
  for (const auto& [h, p] : f) {
    if (h.code >= m.rows()) throw Error(Errc::Internal, "hidden state outside the channel rows");
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += p * m(h.code, j);
  }
  return out;
}

}  // namespace detail

/// True when no extended column holds strictly more mass than the best
/// target column in any fraction of either partition after the channel.
inline bool extended_columns_idle(const AttackChannel& ch, const Partition& source, const Partition& target) {
  const RatMatrix m = ch.expanded();
  const std::size_t extra = ch.extra_columns();
  for (const auto* p : {&source, &target})
    for (const auto& f : p->fractions) {
      const auto out = detail::push_through(m, f);
      Rational best = 0, ext = 0;
      for (std::size_t j = 0; j < out.size(); ++j) {
        Rational& slot = j < extra ? ext : best;
        slot = std::max(slot, out[j]);
      }
      if (ext > best) return false;
    }
  return true;
}

namespace detail {

inline AttackChannel shifted_channel(const SeparatingDirection& dir, const RatMatrix& x, const Partition& source,
                                     const Partition& target, std::uint64_t h_size, VKey trigger, Rational shift) {
  const std::size_t nt = x.rows(), nh = x.cols();
  Rational max_sum = 0;
  std::vector<Rational> sums(nh, Rational(0));
  for (std::size_t h = 0; h < nh; ++h) {
    for (std::size_t r = 0; r < nt; ++r) sums[h] += x(r, h) + shift;
    max_sum = std::max(max_sum, sums[h]);
  }
  if (max_sum == 0) throw Error(Errc::NotSeparable, "direction is constant");
  const Rational scale = 1 / max_sum;

  AttackChannel ch;
  ch.trigger = trigger;
  ch.targets = nt;
  for (std::size_t h = 0; h < nh; ++h)
    if (sums[h] * scale < 1) ch.has_zero = true;
  const std::size_t off = ch.has_zero ? 1 : 0;
  ch.d = RatMatrix(h_size, off + nt);
  std::size_t next = 0;
  for (std::uint64_t code = 0; code < h_size; ++code) {
    ch.rows.push_back(HKey{code});
    const bool rel = next < nh && dir.columns[next].code == code;
    ch.relevant.push_back(rel);
    Rational sum = 0;
    for (std::size_t r = 0; r < nt; ++r) {
      ch.d(code, off + r) = ((rel ? x(r, next) : Rational(0)) + shift) * scale;
      sum += ch.d(code, off + r);
    }
    if (rel) ++next;
    // Rows never reached at the trigger keep the shifted entries only when
    // they still complete to a distribution.
    if (!rel && !(sum == 1 || (sum < 1 && ch.has_zero))) {
      for (std::size_t r = 0; r < nt; ++r) ch.d(code, off + r) = 0;
      continue;
    }
    if (ch.has_zero) ch.d(code, 0) = 1 - sum;
  }
  if (next != nh) throw Error(Errc::Internal, "direction columns are not ascending hidden states");

  if (ch.has_zero) {
    Rational k = 1;
    for (const auto* p : {&source, &target})
      for (const auto& f : p->fractions) {
        const auto out = detail::push_through(ch.d, f);
        Rational best = 0;
        for (std::size_t j = 1; j < out.size(); ++j) best = std::max(best, out[j]);
        if (out[0] > 0 && best > 0) k = std::max(k, detail::ceil_div(out[0], best));
      }
    ch.split = static_cast<std::size_t>(numerator(k).convert_to<long>());
  }
  return ch;
}

/// Some fraction sends all its mass to the zero column.
inline bool zero_column_only(const AttackChannel& ch, const Partition& source, const Partition& target) {
  if (!ch.has_zero) return false;
  for (const auto* p : {&source, &target})
    for (const auto& f : p->fractions) {
      const auto out = push_through(ch.d, f);
      if (out[0] > 0 && std::all_of(out.begin() + 1, out.end(), [](const Rational& q) { return q == 0; }))
        return true;
    }
  return false;
}

}  // namespace detail

/// Turns a separating direction into a channel over all hidden states of a
/// layout with `h_size` states: orient, transpose, shift to nonnegative,
/// scale the largest relevant row sum to 1, then complete with a zero column.
/// When a fraction would land on the zero column alone, the shift is raised
/// so that every relevant entry is positive.
inline AttackChannel build_attack_channel(const SeparatingDirection& dir, const Partition& source,
                                          const Partition& target, std::uint64_t h_size, VKey trigger) {
  if (h_size > kMaxChannelRows) throw Error(Errc::UnsupportedConstruct, "too many hidden states for a channel");
  RatMatrix x = dir.x;
  if (separation_margin(source, target, x, dir.columns) <= 0) {
    x = Rational(-1) * x;
    if (separation_margin(source, target, x, dir.columns) <= 0)
      throw Error(Errc::NotSeparable, "direction separates in neither orientation");
  }
  Rational shift = 0;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t h = 0; h < x.cols(); ++h) shift = std::max(shift, -x(r, h));
  AttackChannel ch = detail::shifted_channel(dir, x, source, target, h_size, trigger, shift);
  if (detail::zero_column_only(ch, source, target))
    ch = detail::shifted_channel(dir, x, source, target, h_size, trigger, shift + 1);
  return ch;
}

}  // namespace hyperflow::attack
