#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hyperflow/attack/synthesize.hpp"
#include "hyperflow/cli/init_spec.hpp"
#include "hyperflow/lang/transform.hpp"
#include "hyperflow/semantics/normal_form.hpp"

namespace hyperflow::cli {

/// One reproduced worked example, tagged with its acceptance criterion.
struct GoldenCheck {
  int criterion = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::InvalidArgument, "cannot read '" + p.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace golden {

using semantics::HyperDist;
using semantics::LayoutPtr;

/// Output of `src` from the single initial state described by `init`.
inline HyperDist eval_at(const std::string& src, const std::string& init) {
  const auto c = semantics::compile(lang::parse(src));
  const auto points = expand(parse_init_spec(init), *c.layout);
  if (points.size() != 1) throw Error(Errc::InvalidArgument, "'" + init + "' names more than one initial state");
  return semantics::eval(c, points.front().state);
}

inline std::string then(const std::string& src, const std::string& stmt) { return src + ";\n" + stmt + "\n"; }

struct SplitEntry {
  Rational p;
  std::vector<Value> v;
  std::vector<std::pair<std::vector<Value>, Rational>> delta;
};

inline HyperDist hyper(const LayoutPtr& l, const std::vector<SplitEntry>& entries) {
  DistBuilder<SplitState> outer;
  for (const auto& e : entries) {
    DistBuilder<HKey> inner;
    for (const auto& [h, p] : e.delta) inner.add(semantics::hidden_key(*l, h), p);
    outer.add(semantics::make_split_state(*l, e.v, inner.build()), e.p);
  }
  return HyperDist{l, outer.build()};
}

inline Value atom(const char* s) { return Value::atom(s); }
inline Value num(long n, long d = 1) { return Value::number(Rational(n, d)); }

inline double shannon(const HyperDist& d) { return std::stod(measures::shannon_entropy(d).mid().to_string(20)); }

class Collector {
 public:
  Collector(int criterion, std::vector<GoldenCheck>& out) : criterion_(criterion), out_(out) {}

  void check(std::string name, bool ok, std::string detail = "") {
    out_.push_back({criterion_, std::move(name), ok, std::move(detail)});
  }

  /// Runs `body`; an escaping exception fails a check named `name`.
  void guard(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(name, false, e.what());
    }
  }

  void within(const std::string& name, std::chrono::steady_clock::time_point start, double limit_s) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check(name, s < limit_s, std::to_string(s) + " s");
  }

 private:
  int criterion_;
  std::vector<GoldenCheck>& out_;
};

inline std::string eq_detail(const Rational& got, const Rational& want) {
  return "got " + to_string(got) + ", want " + to_string(want);
}

inline void threebox(const std::filesystem::path& corpus, std::vector<GoldenCheck>& out) {
  Collector c(1, out);
  const auto start = std::chrono::steady_clock::now();
  c.guard("threebox", [&] {
    const std::string s = read_file(corpus / "threebox_S.hprog");
    const std::string i1 = read_file(corpus / "threebox_I1.hprog");
    const std::string i2 = read_file(corpus / "threebox_I2.hprog");
    const std::string init = "v=bot; h~uniform";
    const HyperDist ds = eval_at(s, init), di1 = eval_at(i1, init), di2 = eval_at(i2, init);
    const auto l = ds.layout;
    const Value bot = atom("bot");
    c.check("Delta'_S output", ds == hyper(l, {{Rational(1, 2), {bot}, {{{num(1)}, Rational(1, 3)}, {{num(2)}, Rational(2, 3)}}},
                                                  {Rational(1, 2), {bot}, {{{num(0)}, Rational(2, 3)}, {{num(1)}, Rational(1, 3)}}}}),
            semantics::to_text(ds));
    c.check("Delta'_I1 output",
            di1 == hyper(l, {{1, {bot}, {{{num(0)}, Rational(1, 3)}, {{num(1)}, Rational(1, 3)}, {{num(2)}, Rational(1, 3)}}}}),
            semantics::to_text(di1));
    c.check("Delta'_I2 output", di2 == hyper(l, {{Rational(1, 3), {bot}, {{{num(2)}, 1}}},
                                                    {Rational(2, 3), {bot}, {{{num(0)}, Rational(1, 2)}, {{num(1)}, Rational(1, 2)}}}}),
            semantics::to_text(di2));
    const Rational bs = measures::bayes_vuln(ds), b1 = measures::bayes_vuln(di1), b2 = measures::bayes_vuln(di2);
    c.check("bv(S) = 2/3", bs == Rational(2, 3), eq_detail(bs, Rational(2, 3)));
    c.check("bv(I1) = 1/3", b1 == Rational(1, 3), eq_detail(b1, Rational(1, 3)));
    c.check("bv(I2) = 2/3", b2 == Rational(2, 3), eq_detail(b2, Rational(2, 3)));
    c.check("S elementary-refines I2", measures::elementary_compare(ds, di2, measures::Measure::bayes()).holds());
    c.check("S refines I1", refine::check_refinement(ds, di1).refined);
    c.check("S does not refine I2", !refine::check_refinement(ds, di2).refined);

    const std::string ctx = "h := h div 2";
    const HyperDist cs = eval_at(then(s, ctx), init), ci2 = eval_at(then(i2, ctx), init);
    const Rational bcs = measures::bayes_vuln(cs), bci = measures::bayes_vuln(ci2);
    c.check("bv(S;h:=h div 2) = 5/6", bcs == Rational(5, 6), eq_detail(bcs, Rational(5, 6)));
    c.check("bv(I2;h:=h div 2) = 1", bci == 1, eq_detail(bci, 1));
    c.check("elementary order not compositional",
            measures::elementary_compare(cs, ci2, measures::Measure::bayes()).kind == measures::Verdict::Kind::FailsMeasure);
  });
  c.within("threebox runtime < 1 s", start, 1.0);
}

inline void general_choice(const std::filesystem::path& corpus, std::vector<GoldenCheck>& out) {
  Collector c(2, out);
  c.guard("general choice", [&] {
    const HyperDist d = eval_at(read_file(corpus / "general_choice.hprog"), "v=0; h~uniform");
    const auto q = num(1, 4), h = num(1, 2);
    const HyperDist want = hyper(d.layout, {{Rational(3, 8), {num(0)}, {{{q}, Rational(1, 3)}, {{h}, Rational(2, 3)}}},
                                            {Rational(5, 8), {num(0)}, {{{q}, Rational(3, 5)}, {{h}, Rational(2, 5)}}}});
    c.check("skip [h] skip output", d == want, semantics::to_text(d));
    const Rational bv = measures::bayes_vuln(d);
    c.check("bv = 5/8", bv == Rational(5, 8), eq_detail(bv, Rational(5, 8)));
  });
}

inline void p2_p4(const std::filesystem::path& corpus, std::vector<GoldenCheck>& out) {
  Collector c(3, out);
  const auto start = std::chrono::steady_clock::now();
  c.guard("P2/P4", [&] {
    const auto p2 = lang::parse(read_file(corpus / "P2.hprog"));
    const auto p4 = lang::parse(read_file(corpus / "P4.hprog"));
    const auto c2 = semantics::compile(p2), c4 = semantics::compile(p4);
    const auto init = expand(parse_init_spec("v=0; h~uniform"), *c2.layout).front().state;
    const HyperDist d2 = semantics::eval(c2, init), d4 = semantics::eval(c4, init);
    c.check("bv(P2) = 5/6", measures::bayes_vuln(d2) == Rational(5, 6), to_string(measures::bayes_vuln(d2)));
    c.check("bv(P4) = 5/6", measures::bayes_vuln(d4) == Rational(5, 6), to_string(measures::bayes_vuln(d4)));

    const auto fwd = refine::check_refinement(d2, d4);
    bool verified = fwd.refined;
    for (const auto& w : fwd.witness) verified = verified && refine::verify_witness(w.r, w.source, w.target);
    c.check("P2 refines P4 with a verified witness", verified);
    const auto back = refine::check_refinement(d4, d2);
    const auto v1 = semantics::visible_key(*c2.layout, {num(1)});
    c.check("P4 does not refine P2, failing at v'=1", !back.refined && back.failing_v && *back.failing_v == v1);

    const auto rep = attack::synthesize_and_verify(p4, p2, init);
    c.check("synthesized context: bv(P2;C) > bv(P4;C)", rep.verdict && rep.bv_i > rep.bv_s,
            to_string(rep.bv_i) + " vs " + to_string(rep.bv_s));
    const auto cert = attack::synthesize_and_verify(p4, p2, init, {attack::kDefaultVertexCap, true});
    c.check("certificate-derived context also distinguishes", cert.verdict, to_string(cert.bv_i) + " vs " + to_string(cert.bv_s));
    c.check("vertex count 3^2 within 3^3", attack::vertex_count(back.failing_source, back.failing_target) <= 27);

    const auto inst = attack::prepare_attack(p4, p2, init);
    const auto cols = refine::support_columns(inst.source, inst.target);
    auto with_direction = [&](const refine::RatMatrix& x) {
      const attack::SeparatingDirection dir{x, attack::separation_margin(inst.source, inst.target, x, cols), cols};
      return attack::attack_with_direction(p4, p2, init, inst, dir);
    };
    using R = Rational;
    const auto r1 = with_direction(refine::RatMatrix::from_rows({{-1, 3}, {0, 0}, {0, 0}}));
    c.check("first reference channel D",
            r1.channel.d == refine::RatMatrix::from_rows({{0, R(2, 5), R(3, 10), R(3, 10)},
                                                          {R(1, 10), R(3, 10), R(3, 10), R(3, 10)},
                                                          {R(2, 5), 0, R(3, 10), R(3, 10)}}),
            r1.channel.d.to_string());
    c.check("first channel: bv(P4;C) = 8/15 (~0.53)", r1.bv_s == R(8, 15), eq_detail(r1.bv_s, R(8, 15)));
    c.check("first channel: bv(P2;C) = 11/20 (~0.55)", r1.bv_i == R(11, 20), eq_detail(r1.bv_i, R(11, 20)));

    const auto r2 = with_direction(refine::RatMatrix::from_rows({{0, 2}, {1, 0}, {1, 0}}));
    c.check("second reference channel D",
            r2.channel.d == refine::RatMatrix::from_rows({{R(1, 2), R(1, 4), R(1, 4)}, {0, 0, 0}, {0, R(1, 2), R(1, 2)}}),
            r2.channel.d.to_string());
    const R s1 = refine::bv_partition(refine::extract_partition(r2.out_s, v1));
    const R i1 = refine::bv_partition(refine::extract_partition(r2.out_i, v1));
    c.check("second channel at v'=1: P4;C scores 13/48", s1 == R(13, 48), eq_detail(s1, R(13, 48)));
    c.check("second channel at v'=1: P2;C scores 7/24", i1 == R(7, 24), eq_detail(i1, R(7, 24)));
  });
  c.within("P2/P4 runtime < 10 s", start, 10.0);
}

inline void decomposition(std::vector<GoldenCheck>& out) {
  Collector c(4, out);
  c.guard("decomposition", [&] {
    using R = Rational;
    using M = refine::RatMatrix;
    const auto parts = refine::decompose_refinement(M::from_rows({{R(1, 3), R(3, 4)}, {R(2, 3), R(1, 4)}}));
    const std::vector<std::pair<R, M>> want{{R(1, 4), M::from_rows({{1, 0}, {0, 1}})},
                                            {R(1, 12), M::from_rows({{1, 1}, {0, 0}})},
                                            {R(2, 3), M::from_rows({{0, 1}, {1, 0}})}};
    std::string got;
    for (const auto& [k, m] : parts) got += to_string(k) + " " + m.to_string() + "; ";
    c.check("2x2 example: 1/4, 1/12, 2/3", parts == want, got);
  });
}

inline void app_f(const std::filesystem::path& corpus, std::vector<GoldenCheck>& out) {
  Collector c(5, out);
  c.guard("measures", [&] {
    const std::string s = read_file(corpus / "threebox_S.hprog");
    const std::string i2 = read_file(corpus / "threebox_I2.hprog");
    const std::string init = "v=bot; h~uniform";
    const HyperDist ds = eval_at(s, init), di2 = eval_at(i2, init);
    const double hs = shannon(ds), hi = shannon(di2);
    const double lg3 = std::log2(3.0);
    c.check("H(Delta'_I2) = 2/3", std::abs(hi - 2.0 / 3) <= 1e-9, std::to_string(hi));
    c.check("H(Delta'_S) = lg3 - 2/3", std::abs(hs - (lg3 - 2.0 / 3)) <= 1e-9, std::to_string(hs));

    const std::string ctx = "h := (1 if h = 2 else h)";
    const HyperDist cs = eval_at(then(s, ctx), init), ci2 = eval_at(then(i2, ctx), init);
    const double hcs = shannon(cs), hci = shannon(ci2);
    c.check("Shannon context: C(S) ~ 0.459", std::abs(hcs - (lg3 - 2.0 / 3) / 2) <= 1e-9 && std::abs(hcs - 0.459) < 1e-3,
            std::to_string(hcs));
    c.check("Shannon context: C(I2) = 2/3", std::abs(hci - 2.0 / 3) <= 1e-9, std::to_string(hci));
    c.check("Shannon order reverses under context", hs > hi && hcs < hci);

    const Rational gs = measures::guessing_entropy(ds), gi = measures::guessing_entropy(di2);
    const Rational gcs = measures::guessing_entropy(cs), gci = measures::guessing_entropy(ci2);
    c.check("guessing entropy 4/3 vs 4/3", gs == Rational(4, 3) && gi == Rational(4, 3), to_string(gs) + " vs " + to_string(gi));
    c.check("guessing entropy in context 7/6 vs 4/3", gcs == Rational(7, 6) && gci == Rational(4, 3),
            to_string(gcs) + " vs " + to_string(gci));

    const auto l = std::make_shared<semantics::Layout>(std::vector<semantics::VarInfo>{
        {"v", {num(0)}, true}, {"h", {num(0), num(1), num(2), num(3), num(4)}, false}});
    const Rational q = Rational(1, 4);
    const HyperDist gsep = hyper(l, {{Rational(1, 2), {num(0)}, {{{num(0)}, 1}}},
                                     {Rational(1, 2), {num(0)}, {{{num(1)}, q}, {{num(2)}, q}, {{num(3)}, q}, {{num(4)}, q}}}});
    const Rational e = Rational(1, 8);
    const HyperDist gmix =
        hyper(l, {{1, {num(0)}, {{{num(0)}, Rational(1, 2)}, {{num(1)}, e}, {{num(2)}, e}, {{num(3)}, e}, {{num(4)}, e}}}});
    const auto g1 = measures::marginal_guesswork(gsep, Rational(1, 2));
    const auto g2 = measures::marginal_guesswork(gmix, Rational(1, 2));
    c.check("marginal guesswork G_1/2 = 1 on both", g1 == 1 && g2 == 1, std::to_string(g1) + " vs " + std::to_string(g2));

    const std::string ps = read_file(corpus / "guesswork_S.hprog");
    const std::string pi = read_file(corpus / "guesswork_I.hprog");
    const std::string ginit = "v=bot; h~uniform";
    const std::string gctx = "h := (h div 2 if h >= 0 else h)";
    const auto alpha = measures::Measure::marginal_guesswork(Rational(1, 2));
    const HyperDist os = eval_at(ps, ginit), oi = eval_at(pi, ginit);
    const HyperDist ocs = eval_at(then(ps, gctx), ginit), oci = eval_at(then(pi, gctx), ginit);
    c.check("parametric programs: G = 2 on both",
            measures::marginal_guesswork(os, alpha.alpha) == 2 && measures::marginal_guesswork(oi, alpha.alpha) == 2);
    c.check("parametric programs: context gives 2 vs 1",
            measures::marginal_guesswork(ocs, alpha.alpha) == 2 && measures::marginal_guesswork(oci, alpha.alpha) == 1);
    c.check("parametric programs: order holds, then flips under context",
            measures::elementary_compare(os, oi, alpha).holds() &&
                measures::elementary_compare(ocs, oci, alpha).kind == measures::Verdict::Kind::FailsMeasure);
  });
}

inline void algebra(const std::filesystem::path& corpus, std::vector<GoldenCheck>& out) {
  Collector c(7, out);
  c.guard("program algebra", [&] {
    const auto block = semantics::compile(lang::parse(read_file(corpus / "encryption_lemma.hprog")));
    const auto skip = semantics::compile(lang::parse("hid e : bool;\nskip\n"));
    std::size_t n = 0;
    bool same = true;
    for (const char* spec : {"*~points", "*~uniform", "*~sample:20"})
      for (const auto& pt : expand(parse_init_spec(spec, 7), *block.layout)) {
        same = same && semantics::eval(block, pt.state) == semantics::eval(skip, pt.state);
        ++n;
      }
    c.check("Encryption Lemma block equals skip on the prior grid", same && n == 23, std::to_string(n) + " priors");

    const auto a1 = semantics::compile(lang::parse("vis v : {0, 1}; hid h : {0, 1};\nv := h\n"));
    const auto a2 = semantics::compile(lang::parse("vis v : {0, 1}; hid h : {0, 1};\nv := 0\n"));
    c.check("atomicity fails for (v := h, v := 0)", !semantics::check_atomic_distribution(a1, a2).holds);
    const std::string decls = "vis x : bool; hid y : bool; hid e : bool;\n";
    const auto e1 = semantics::compile(lang::parse(decls + "x <- uniform{true, false}\n"));
    const auto e2 = semantics::compile(lang::parse(decls + "y := x xor e\n"));
    c.check("atomicity holds for the Encryption Lemma decomposition", semantics::check_atomic_distribution(e1, e2).holds);
  });
}

/// Reference vs implementation views, for every agent and priors over (a,b,c).
inline void three_judges(const std::filesystem::path& corpus, std::vector<GoldenCheck>& out, std::uint64_t seed = 11) {
  Collector c(8, out);
  const auto start = std::chrono::steady_clock::now();
  c.guard("three judges", [&] {
    const auto spec = lang::parse(read_file(corpus / "three_judges_spec.hprog"));
    for (const char* impl_file : {"three_judges_fig2.hprog", "three_judges_fig3.hprog"}) {
      const auto impl = lang::parse(read_file(corpus / impl_file));
      for (const char* agent : {"A", "B", "C", "X"}) {
        const auto sv = semantics::compile(lang::project_view(spec, agent));
        const auto iv = semantics::compile(lang::project_view(impl, agent));
        std::size_t n = 0;
        bool ok = true;
        std::vector<std::string> visible_values{""};
        for (const auto& v : sv.layout->visible()) {
          std::vector<std::string> next;
          for (const auto& prefix : visible_values)
            for (const auto& d : v.domain) next.push_back(prefix + v.name + "=" + to_string(d) + ";");
          visible_values = std::move(next);
        }
        for (const auto& vis : visible_values)
          for (const char* prior : {"*~points", "*~uniform", "*~sample:10"}) {
            const std::string text = vis + (sv.layout->hidden().empty() ? "" : prior);
            for (const auto& pt : expand(parse_init_spec(text, seed), *sv.layout)) {
              const HyperDist a = semantics::eval(sv, pt.state), b = semantics::eval(iv, pt.state);
              ok = ok && refine::check_refinement(a, b).refined && refine::check_refinement(b, a).refined;
              ++n;
            }
            if (sv.layout->hidden().empty()) break;
          }
        c.check(std::string(impl_file) + " agent " + agent + " mutually refines three_judges_spec", ok,
                std::to_string(n) + " initial states");
      }
    }
  });
  c.within("three judges runtime < 10 min", start, 600.0);
}

}  // namespace golden

/// Every worked example with an exact expected value; Shannon within 1e-9.
inline std::vector<GoldenCheck> golden_checks(const std::filesystem::path& corpus) {
  std::vector<GoldenCheck> out;
  golden::threebox(corpus, out);
  golden::general_choice(corpus, out);
  golden::p2_p4(corpus, out);
  golden::decomposition(out);
  golden::app_f(corpus, out);
  golden::algebra(corpus, out);
  golden::three_judges(corpus, out);
  return out;
}

}  // namespace hyperflow::cli
