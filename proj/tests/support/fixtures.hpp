#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hyperflow/attack/synthesize.hpp"
#include "hyperflow/cli/init_spec.hpp"
#include "hyperflow/semantics/normal_form.hpp"

namespace hyperflow::testing {

using refine::Fraction;
using refine::Partition;
using refine::RatMatrix;
using semantics::HKey;
using semantics::HyperDist;
using semantics::Layout;
using semantics::LayoutPtr;
using semantics::SplitState;
using semantics::VKey;

struct SuiteResult {
  bool ok = true;
  std::size_t cases = 0;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin() { return below(2) == 1; }
  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[below(xs.size())];
  }

  /// Probability vector of length n with small denominators; `full` forbids zeros.
  std::vector<Rational> probs(std::size_t n, bool full = false) {
    std::vector<long> w(n);
    long total = 0;
    while (total == 0) {
      total = 0;
      for (auto& x : w) total += (x = static_cast<long>(below(5)) + (full ? 1 : 0));
    }
    std::vector<Rational> out;
    for (long x : w) out.emplace_back(x, total);
    return out;
  }

  FiniteDist<HKey> delta(std::size_t nh) {
    const auto p = probs(nh);
    DistBuilder<HKey> b;
    for (std::size_t h = 0; h < nh; ++h) b.add(HKey{h}, p[h]);
    return b.build();
  }

  /// Hyper-distribution with up to `max_states` split-states.
  HyperDist hyper(const LayoutPtr& l, std::size_t max_states = 4) {
    const std::size_t n = 1 + below(max_states);
    const auto w = probs(n, true);
    DistBuilder<SplitState> b;
    for (std::size_t k = 0; k < n; ++k) b.add(SplitState{VKey{below(l->v_size())}, delta(l->h_size())}, w[k]);
    return HyperDist{l, b.build()};
  }

  RatMatrix refinement_matrix(std::size_t rows, std::size_t cols) {
    RatMatrix m(rows, cols);
    for (std::size_t c = 0; c < cols; ++c) {
      const auto p = probs(rows);
      for (std::size_t r = 0; r < rows; ++r) m(r, c) = p[r];
    }
    return m;
  }

  /// R * Pi per visible value, with a fresh random R for each.
  HyperDist refine_hyper(const HyperDist& d) {
    std::vector<std::pair<VKey, Partition>> parts;
    for (VKey v : refine::visible_values(d, d)) {
      const Partition p = refine::extract_partition(d, v);
      parts.emplace_back(v, apply(refinement_matrix(1 + below(3), p.size()), p));
    }
    return from_partitions(d.layout, parts);
  }

  static Partition apply(const RatMatrix& r, const Partition& p) {
    Partition out;
    for (std::size_t i = 0; i < r.rows(); ++i) {
      DistBuilder<HKey> b;
      for (std::size_t c = 0; c < p.size(); ++c) b.add_all(p.fractions[c], r(i, c));
      Fraction f = b.build();
      if (f.weight() != 0) out.fractions.push_back(std::move(f));
    }
    out.sort();
    return out;
  }

  static HyperDist from_partitions(const LayoutPtr& l, const std::vector<std::pair<VKey, Partition>>& parts) {
    DistBuilder<SplitState> b;
    for (const auto& [v, p] : parts)
      for (const auto& f : p.fractions) b.add(SplitState{v, normalize(f)}, f.weight());
    return HyperDist{l, b.build()};
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline LayoutPtr small_layout(std::size_t nv, std::size_t nh) {
  std::vector<Value> vd, hd;
  for (std::size_t k = 0; k < nv; ++k) vd.push_back(Value::integer(static_cast<std::int64_t>(k)));
  for (std::size_t k = 0; k < nh; ++k) hd.push_back(Value::integer(static_cast<std::int64_t>(k)));
  return std::make_shared<const Layout>(std::vector<semantics::VarInfo>{{"v", vd, true}, {"h", hd, false}});
}

/// Random statements over `vis v : {0..2}; hid h : {0..2}`.
class ProgramGen {
 public:
  /// Without locals the programs stay inside the normal-form fragment.
  ProgramGen(Gen& g, bool locals) : g_(g), locals_(locals) {}

  static constexpr const char* kDecls = "vis v : {0..2};\nhid h : {0..2};\n";

  std::string expr() {
    const std::string k = std::to_string(g_.below(3));
    switch (g_.below(8)) {
      case 0: return k;
      case 1: return "v";
      case 2: return "h";
      case 3: return "(v + h) mod 3";
      case 4: return "(h + " + k + ") mod 3";
      case 5: return "2 - h";
      case 6: return "(v * h) mod 3";
      default: return "(" + k + " if h = " + std::to_string(g_.below(3)) + " else v)";
    }
  }

  std::string guard() {
    const std::string k = std::to_string(g_.below(3));
    switch (g_.below(5)) {
      case 0: return "v = h";
      case 1: return "h < " + k;
      case 2: return "v = " + k;
      case 3: return "h mod 2 = 0";
      default: return "not (v = h)";
    }
  }

  std::string dist() {
    switch (g_.below(5)) {
      case 0: return "uniform{0, 1, 2}";
      case 1: return "uniform{" + std::to_string(g_.below(3)) + ", " + std::to_string(g_.below(3)) + "}";
      case 2: return "{0 @ 1/3, 1 @ 2/3}";
      case 3: return "{h @ 1/2, v @ 1/2}";
      default: return "{0 @ (h + 1)/4, 2 @ 1 - (h + 1)/4}";
    }
  }

  std::string prob() {
    switch (g_.below(3)) {
      case 0: return "1/3";
      case 1: return "(h + 1)/4";
      default: return "h/2";
    }
  }

  std::string stmt(int depth, bool in_atomic = false) {
    const std::size_t kinds = depth <= 0 ? 5 : 10;
    switch (g_.below(kinds)) {
      case 0: return "v := " + expr();
      case 1: return "h := " + expr();
      case 2: return "v <- " + dist();
      case 3: return "h <- " + dist();
      case 4: return in_atomic || !locals_ ? "skip" : "reveal " + expr();
      case 5: return "{ " + stmt(depth - 1, in_atomic) + " } [" + prob() + "] { " + stmt(depth - 1, in_atomic) + " }";
      case 6:
        return "if " + guard() + " then " + stmt(depth - 1, in_atomic) + " else " + stmt(depth - 1, in_atomic) + " fi";
      case 7: return "atomic { " + stmt(depth - 1, true) + "; " + stmt(depth - 1, true) + " }";
      case 8:
        if (in_atomic || !locals_) return "skip";
        {
          const std::string t = "t" + std::to_string(fresh_++);
          return "local hid " + t + " : {0..2} := " + expr() + " in { " + stmt(depth - 1) + "; v := (v + " + t + ") mod 3 }";
        }
      default: return stmt(depth - 1, in_atomic) + "; " + stmt(depth - 1, in_atomic);
    }
  }

  std::string program(int depth = 3) { return kDecls + stmt(depth) + "\n"; }

 private:
  Gen& g_;
  bool locals_;
  std::size_t fresh_ = 0;
};

/// Functionally equivalent pairs: v passes through an intermediate leak,
/// then is overwritten by a fixed function of h.
struct LeakPair {
  std::string s, i, init;
};

inline std::string table(const std::vector<std::string>& vals) {
  std::string out = vals.back();
  for (std::size_t k = vals.size() - 1; k-- > 0;)
    out = "(" + vals[k] + " if h = " + std::to_string(k) + " else " + out + ")";
  return out;
}

inline std::string leak_program(std::size_t nh, const std::vector<std::vector<Rational>>& rows, const std::string& g) {
  std::vector<std::string> cols[3];
  for (std::size_t h = 0; h < nh; ++h)
    for (std::size_t o = 0; o < 3; ++o) cols[o].push_back(to_short_string(rows[h][o]));
  return "vis v : {0..2};\nhid h : {0.." + std::to_string(nh - 1) + "};\n" + "v <- {0 @ " + table(cols[0]) + ", 1 @ " +
         table(cols[1]) + ", 2 @ " + table(cols[2]) + "};\nv := " + g + "\n";
}

inline LeakPair leak_pair(Gen& g) {
  const std::size_t nh = 2 + g.below(3);
  std::vector<std::string> out;
  for (std::size_t h = 0; h < nh; ++h) out.push_back(std::to_string(g.below(2)));
  const std::string final_v = table(out);
  auto rows = [&] {
    std::vector<std::vector<Rational>> r;
    for (std::size_t h = 0; h < nh; ++h) r.push_back(g.probs(3));
    return r;
  };
  std::string init = "v=0; h~";
  if (g.coin()) {
    init += "uniform";
  } else {
    const auto p = g.probs(nh, true);
    init += "{";
    for (std::size_t h = 0; h < nh; ++h) init += (h ? "," : "") + std::to_string(h) + "@" + to_string(p[h]);
    init += "}";
  }
  return {leak_program(nh, rows(), final_v), leak_program(nh, rows(), final_v), init};
}

inline SplitState init_state(const Layout& l, const std::string& spec) {
  return cli::expand(cli::parse_init_spec(spec), l).front().state;
}

// Suites ---------------------------------------------------------------------

/// Reflexivity, transitivity and antisymmetry (up to similarity) of ⊑.
inline SuiteResult order_laws(std::size_t n, std::uint64_t seed) {
  Gen g(seed);
  SuiteResult r;
  for (std::size_t k = 0; k < n; ++k) {
    const auto l = small_layout(1 + g.below(2), 2 + g.below(2));
    const HyperDist a = g.hyper(l), b = g.refine_hyper(a), c = g.refine_hyper(b), other = g.hyper(l);
    if (!refine::check_refinement(a, a).refined) r.fail("not reflexive at case " + std::to_string(k));
    if (!refine::check_refinement(a, b).refined) r.fail("constructed refinement rejected at case " + std::to_string(k));
    if (!refine::check_refinement(a, c).refined) r.fail("not transitive at case " + std::to_string(k));
    for (const auto& [x, y] : {std::pair{a, b}, std::pair{a, other}}) {
      if (refine::check_refinement(x, y).refined && refine::check_refinement(y, x).refined)
        for (VKey v : refine::visible_values(x, y))
          if (!refine::similar(refine::extract_partition(x, v), refine::extract_partition(y, v)))
            r.fail("not antisymmetric at case " + std::to_string(k));
    }
    ++r.cases;
  }
  return r;
}

/// C(S) ⊑ C(I) whenever S ⊑ I, for random contexts C.
inline SuiteResult monotonicity(std::size_t n, std::uint64_t seed) {
  Gen g(seed);
  ProgramGen pg(g, true);
  SuiteResult r;
  for (std::size_t k = 0; k < n; ++k) {
    const auto ctx = semantics::compile(lang::parse(pg.program(2)));
    const HyperDist s = g.hyper(ctx.layout), i = g.refine_hyper(s);
    if (!refine::check_refinement(semantics::eval(ctx, s), semantics::eval(ctx, i)).refined)
      r.fail("context " + std::to_string(k) + " breaks refinement");
    ++r.cases;
  }
  return r;
}

/// No measure reports a loss when S ⊑ I.
inline SuiteResult measure_soundness(std::size_t n, std::uint64_t seed) {
  Gen g(seed);
  SuiteResult r;
  const std::vector<measures::Measure> ms{measures::Measure::bayes(), measures::Measure::shannon(),
                                          measures::Measure::guessing_entropy(),
                                          measures::Measure::marginal_guesswork(Rational(1, 4)),
                                          measures::Measure::marginal_guesswork(Rational(1, 2)),
                                          measures::Measure::marginal_guesswork(Rational(1))};
  for (std::size_t k = 0; k < n; ++k) {
    const auto l = small_layout(1 + g.below(2), 2 + g.below(2));
    const HyperDist a = g.hyper(l), b = g.refine_hyper(a);
    for (const auto& m : ms) {
      const auto v = measures::elementary_compare(a, b, m);
      if (v.kind == measures::Verdict::Kind::FailsMeasure || v.kind == measures::Verdict::Kind::FailsFunctional)
        r.fail(measures::measure_name(m) + " unsound at case " + std::to_string(k) + ": " + v.value_s + " vs " + v.value_i);
    }
    ++r.cases;
  }
  return r;
}

/// Every non-refining pair at |H| <= 4 yields a verified attack. Also counts
/// the non-refining pairs so a vacuous pass is visible.
inline SuiteResult completeness(std::size_t n, std::uint64_t seed, std::size_t* not_refined = nullptr) {
  Gen g(seed);
  SuiteResult r;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const LeakPair p = leak_pair(g);
    const auto s = lang::parse(p.s), i = lang::parse(p.i);
    const auto sc = semantics::compile(s), ic = semantics::compile(i);
    const SplitState init = init_state(*sc.layout, p.init);
    if (refine::check_refinement(semantics::eval(sc, init), semantics::eval(ic, init)).refined) continue;
    ++hits;
    const auto rep = attack::synthesize_and_verify(s, i, init);
    if (!rep.verdict) r.fail("no distinguishing context for case " + std::to_string(k) + ":\n" + p.s + p.i);
    ++r.cases;
  }
  if (not_refined) *not_refined = hits;
  if (hits == 0) r.fail("no non-refining pair was generated");
  return r;
}

/// Whenever a non-Bayes order fails, some context makes the Bayes order fail.
inline SuiteResult maximal_discrimination(std::size_t n, std::uint64_t seed) {
  Gen g(seed);
  SuiteResult r;
  const std::vector<measures::Measure> ms{measures::Measure::shannon(), measures::Measure::guessing_entropy(),
                                          measures::Measure::marginal_guesswork(Rational(1, 2))};
  for (std::size_t k = 0; k < n; ++k) {
    const LeakPair p = leak_pair(g);
    const auto s = lang::parse(p.s), i = lang::parse(p.i);
    const auto sc = semantics::compile(s), ic = semantics::compile(i);
    const SplitState init = init_state(*sc.layout, p.init);
    const HyperDist ds = semantics::eval(sc, init), di = semantics::eval(ic, init);
    bool other_fails = false;
    for (const auto& m : ms)
      other_fails = other_fails || measures::elementary_compare(ds, di, m).kind == measures::Verdict::Kind::FailsMeasure;
    if (!other_fails) continue;
    const auto rep = attack::synthesize_and_verify(s, i, init);
    const auto bayes = measures::elementary_compare(rep.out_s, rep.out_i, measures::Measure::bayes());
    if (!rep.verdict || bayes.kind != measures::Verdict::Kind::FailsMeasure)
      r.fail("no Bayes-failing context for case " + std::to_string(k));
    ++r.cases;
  }
  if (r.cases == 0) r.fail("no fixture failed a non-Bayes order");
  return r;
}

/// Greedy decomposition reconstructs random refinement matrices exactly.
inline SuiteResult decomposition(std::size_t n, std::uint64_t seed) {
  Gen g(seed);
  SuiteResult r;
  for (std::size_t k = 0; k < n; ++k) {
    const RatMatrix m = g.refinement_matrix(1 + g.below(4), 1 + g.below(4));
    RatMatrix sum(m.rows(), m.cols());
    Rational total = 0;
    for (const auto& [c, s] : refine::decompose_refinement(m)) {
      for (std::size_t j = 0; j < s.cols(); ++j) {
        int ones = 0;
        for (std::size_t i = 0; i < s.rows(); ++i) {
          if (s(i, j) != 0 && s(i, j) != 1) r.fail("non-0/1 entry at case " + std::to_string(k));
          ones += s(i, j) == 1;
        }
        if (ones != 1) r.fail("column without a single 1 at case " + std::to_string(k));
      }
      if (c <= 0) r.fail("non-positive coefficient at case " + std::to_string(k));
      sum = sum + c * s;
      total += c;
    }
    if (!(sum == m) || total != 1) r.fail("reconstruction differs at case " + std::to_string(k));
    ++r.cases;
  }
  return r;
}

/// Direct evaluation agrees with the matrix normal form.
inline SuiteResult eval_vs_normal_form(std::size_t n, std::uint64_t seed) {
  Gen g(seed);
  ProgramGen pg(g, false);
  SuiteResult r;
  for (std::size_t k = 0; k < n; ++k) {
    const std::string src = pg.program(3);
    const auto c = semantics::compile(lang::parse(src));
    const SplitState init{VKey{g.below(c.layout->v_size())}, g.delta(c.layout->h_size())};
    if (!(semantics::eval(c, init) == semantics::eval_via_normal_form(c, init)))
      r.fail("backends disagree on:\n" + src);
    ++r.cases;
  }
  return r;
}

}  // namespace hyperflow::testing
