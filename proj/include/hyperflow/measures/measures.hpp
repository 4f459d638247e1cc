#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "hyperflow/measures/bigfloat.hpp"
#include "hyperflow/semantics/hyper.hpp"

namespace hyperflow::measures {

using semantics::HyperDist;
using semantics::JointKey;

struct Measure {
  enum class Kind { BayesVuln, Shannon, GuessingEntropy, MarginalGuesswork };
  Kind kind = Kind::BayesVuln;
  Rational alpha = 1;  // MarginalGuesswork only

  static Measure bayes() { return {Kind::BayesVuln, 1}; }
  static Measure shannon() { return {Kind::Shannon, 1}; }
  static Measure guessing_entropy() { return {Kind::GuessingEntropy, 1}; }
  static Measure marginal_guesswork(Rational alpha) {
    if (alpha <= 0 || alpha > 1) throw Error(Errc::InvalidArgument, "alpha must lie in (0,1]");
    return {Kind::MarginalGuesswork, std::move(alpha)};
  }
};

inline std::string measure_name(const Measure& m) {
  switch (m.kind) {
    case Measure::Kind::BayesVuln: return "bayes";
    case Measure::Kind::Shannon: return "shannon";
    case Measure::Kind::GuessingEntropy: return "gentropy";
    case Measure::Kind::MarginalGuesswork: return "guesswork:" + to_short_string(m.alpha);
  }
  return "?";
}

/// bayes | shannon | gentropy | guesswork:A
inline Measure parse_measure(std::string_view s) {
  if (s == "bayes") return Measure::bayes();
  if (s == "shannon") return Measure::shannon();
  if (s == "gentropy") return Measure::guessing_entropy();
  if (s.substr(0, 10) == "guesswork:") return Measure::marginal_guesswork(parse_rational(s.substr(10)));
  throw Error(Errc::InvalidArgument, "unknown measure '" + std::string(s) + "'");
}

/// Overall output distribution over (v, h).
inline FiniteDist<JointKey> ft(const HyperDist& d) { return semantics::joint_of(d.outer); }

inline Rational bayes_vuln(const HyperDist& d) {
  Rational s = 0;
  for (const auto& [st, w] : d.outer) s += w * st.delta.max_prob();
  return s;
}

/// Probabilities of delta padded with zeros to n entries, ascending.
inline std::vector<Rational> padded_probs(const FiniteDist<semantics::HKey>& delta, std::uint64_t n) {
  std::vector<Rational> ps;
  for (const auto& [h, p] : delta) ps.push_back(p);
  ps.resize(std::max<std::size_t>(ps.size(), n), Rational(0));
  std::sort(ps.begin(), ps.end());
  return ps;
}

/// Expected number of guesses under the optimal guessing order.
inline Rational guessing_entropy(const HyperDist& d) {
  const std::uint64_t n = d.layout->h_size();
  Rational total = 0;
  for (const auto& [st, w] : d.outer) {
    Rational acc = 0, sum = 0;
    for (const auto& p : padded_probs(st.delta, n)) {
      acc += p;
      sum += acc;
    }
    total += w * sum;
  }
  return total;
}

/// Least i such that guessing the i likeliest values of each inner
/// distribution succeeds with overall probability at least alpha.
inline std::uint64_t marginal_guesswork(const HyperDist& d, const Rational& alpha) {
  if (alpha <= 0 || alpha > 1) throw Error(Errc::InvalidArgument, "alpha must lie in (0,1]");
  std::vector<std::vector<Rational>> desc;
  std::size_t longest = 0;
  for (const auto& [st, w] : d.outer) {
    std::vector<Rational> ps;
    for (const auto& [h, p] : st.delta) ps.push_back(p);
    std::sort(ps.rbegin(), ps.rend());
    longest = std::max(longest, ps.size());
    desc.push_back(std::move(ps));
  }
  Rational mass = 0;
  for (std::size_t i = 1; i <= longest; ++i) {
    std::size_t k = 0;
    for (const auto& [st, w] : d.outer) {
      if (i <= desc[k].size()) mass += w * desc[k][i - 1];
      ++k;
    }
    if (mass >= alpha) return i;
  }
  return std::max<std::size_t>(longest, 1);
}

/// Shannon entropy as an exact linear combination sum_i c_i * lg(n_i).
using LogCombination = std::map<BigInt, Rational>;

inline LogCombination shannon_terms(const HyperDist& d) {
  LogCombination out;
  for (const auto& [st, w] : d.outer)
    for (const auto& [h, p] : st.delta) {
      // -p lg p = p (lg den - lg num)
      const Rational c = w * p;
      const BigInt num = numerator(p), den = denominator(p);
      if (den > 1) out[den] += c;
      if (num > 1) out[num] -= c;
    }
  return out;
}

/// Rewrites a combination over a pairwise coprime base, in which the
/// logarithms are linearly independent over the rationals.
inline LogCombination coprime_normal_form(const LogCombination& in) {
  std::vector<BigInt> base;
  for (const auto& [n, c] : in)
    if (c != 0) base.push_back(n);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < base.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < base.size() && !changed; ++j) {
        const BigInt g = gcd(base[i], base[j]);
        if (g == 1) continue;
        const BigInt a = base[i] / g, b = base[j] / g;
        base.erase(base.begin() + static_cast<long>(j));
        base.erase(base.begin() + static_cast<long>(i));
        for (const BigInt& x : {a, b, g})
          if (x > 1 && std::find(base.begin(), base.end(), x) == base.end()) base.push_back(x);
        changed = true;
      }
  }
  LogCombination out;
  for (const auto& [n, c] : in) {
    if (c == 0) continue;
    BigInt rest = n;
    for (const auto& b : base)
      while (rest % b == 0) {
        rest /= b;
        out[b] += c;
      }
    if (rest != 1) throw Error(Errc::Internal, "coprime base does not cover " + rest.str());
  }
  std::erase_if(out, [](const auto& e) { return e.second == 0; });
  return out;
}

inline Interval enclose(const LogCombination& terms, long precision) {
  Interval total = Interval::exact(Rational(0), precision);
  for (const auto& [n, c] : terms) total = total + Interval::exact(c, precision) * Interval::lg(Rational(n), precision);
  return total;
}

/// Expected entropy of the inner distributions, enclosed by directed rounding.
inline Interval shannon_entropy(const HyperDist& d, long precision = precision_from_env()) {
  if (precision < kMinPrecisionBits) throw Error(Errc::InvalidArgument, "precision must be at least 64 bits");
  return enclose(shannon_terms(d), precision);
}

/// True when the two entropies are equal as real numbers.
inline bool shannon_equal(const HyperDist& a, const HyperDist& b) {
  LogCombination diff = shannon_terms(a);
  for (const auto& [n, c] : shannon_terms(b)) diff[n] -= c;
  return coprime_normal_form(diff).empty();
}

constexpr double kShannonTolerance = 1e-9;

struct Verdict {
  enum class Kind { Holds, FailsFunctional, FailsMeasure, ToleranceInconclusive };
  Kind kind = Kind::Holds;
  std::string measure;
  std::string value_s, value_i;

  bool holds() const { return kind == Kind::Holds; }
};

inline const char* verdict_name(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Holds: return "Holds";
    case Verdict::Kind::FailsFunctional: return "FailsFunctional";
    case Verdict::Kind::FailsMeasure: return "FailsMeasure";
    case Verdict::Kind::ToleranceInconclusive: return "ToleranceInconclusive";
  }
  return "?";
}

/// Text of a measure's value: exact rationals, integers, or a decimal for Shannon.
inline std::string measure_value(const HyperDist& d, const Measure& m, long precision = precision_from_env()) {
  switch (m.kind) {
    case Measure::Kind::BayesVuln: return to_string(bayes_vuln(d));
    case Measure::Kind::GuessingEntropy: return to_string(guessing_entropy(d));
    case Measure::Kind::MarginalGuesswork: return std::to_string(marginal_guesswork(d, m.alpha));
    case Measure::Kind::Shannon: return shannon_entropy(d, precision).mid().to_string(20);
  }
  return "?";
}

/// Elementary testing order: equal functional projection and no loss of
/// uncertainty (no gain in vulnerability) from S to I.
inline Verdict elementary_compare(const HyperDist& s, const HyperDist& i, const Measure& m,
                                  long precision = precision_from_env()) {
  semantics::require_same_layout(*s.layout, *i.layout);
  Verdict v;
  v.measure = measure_name(m);
  v.value_s = measure_value(s, m, precision);
  v.value_i = measure_value(i, m, precision);
  if (ft(s) != ft(i)) {
    v.kind = Verdict::Kind::FailsFunctional;
    return v;
  }
  bool ok = true;
  switch (m.kind) {
    case Measure::Kind::BayesVuln: ok = bayes_vuln(i) <= bayes_vuln(s); break;
    case Measure::Kind::GuessingEntropy: ok = guessing_entropy(i) >= guessing_entropy(s); break;
    case Measure::Kind::MarginalGuesswork: ok = marginal_guesswork(i, m.alpha) >= marginal_guesswork(s, m.alpha); break;
    case Measure::Kind::Shannon: {
      if (shannon_equal(s, i)) break;
      const Interval diff = shannon_entropy(i, precision) - shannon_entropy(s, precision);
      if (diff.within(kShannonTolerance) || diff.sign() == 0) {
        v.kind = Verdict::Kind::ToleranceInconclusive;
        return v;
      }
      ok = diff.sign() > 0;
      break;
    }
  }
  v.kind = ok ? Verdict::Kind::Holds : Verdict::Kind::FailsMeasure;
  return v;
}

}  // namespace hyperflow::measures
