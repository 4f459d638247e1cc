#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "hyperflow/cli/cli.hpp"
#include "hyperflow/cli/golden.hpp"

namespace hyperflow {
namespace {

using cli::golden::eval_at;
using refine::Partition;
using refine::RatMatrix;
using semantics::HKey;
using semantics::HyperDist;

const std::filesystem::path kCorpus = HYPERFLOW_CORPUS_DIR;

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error was thrown";
  return Errc::Internal;
}

std::string corpus(const char* name) { return cli::read_file(kCorpus / name); }

HyperDist threebox(const char* name) { return eval_at(corpus(name), "v=bot; h~uniform"); }

Partition partition(const std::vector<std::vector<Rational>>& rows) {
  Partition p;
  for (const auto& r : rows) {
    DistBuilder<HKey> b;
    for (std::size_t h = 0; h < r.size(); ++h)
      if (r[h] != 0) b.add(HKey{h}, r[h]);
    p.fractions.push_back(b.build());
  }
  p.sort();
  return p;
}

// measures

TEST(Measures, BayesVulnerabilityOfTheThreeBoxes) {
  EXPECT_EQ(measures::bayes_vuln(threebox("threebox_S.hprog")), Rational(2, 3));
  EXPECT_EQ(measures::bayes_vuln(threebox("threebox_I1.hprog")), Rational(1, 3));
  EXPECT_EQ(measures::bayes_vuln(threebox("threebox_I2.hprog")), Rational(2, 3));
}

TEST(Measures, GuessingEntropyCountsPaddedGuesses) {
  EXPECT_EQ(measures::guessing_entropy(threebox("threebox_S.hprog")), Rational(4, 3));
  EXPECT_EQ(measures::guessing_entropy(threebox("threebox_I1.hprog")), Rational(2));
}

TEST(Measures, MarginalGuessworkIsTheLeastSufficientDepth) {
  const HyperDist i1 = threebox("threebox_I1.hprog");
  EXPECT_EQ(measures::marginal_guesswork(i1, Rational(1, 3)), 1u);
  EXPECT_EQ(measures::marginal_guesswork(i1, Rational(1, 2)), 2u);
  EXPECT_EQ(measures::marginal_guesswork(i1, Rational(1)), 3u);
  EXPECT_EQ(code_of([&] { measures::marginal_guesswork(i1, Rational(0)); }), Errc::InvalidArgument);
}

TEST(Measures, ShannonEntropyEnclosesTheExactValue) {
  const auto s = measures::shannon_entropy(threebox("threebox_S.hprog"));
  EXPECT_LE(s.lo().to_double(), 0.9182958340544896);
  EXPECT_GE(s.hi().to_double(), 0.9182958340544896);
  EXPECT_NEAR(measures::shannon_entropy(threebox("threebox_I1.hprog")).mid().to_double(), 1.584962500721156, 1e-12);
}

TEST(Measures, ParseAndNameRoundTrip) {
  for (const char* m : {"bayes", "shannon", "gentropy", "guesswork:1/2"})
    EXPECT_EQ(measures::measure_name(measures::parse_measure(m)), m);
  EXPECT_EQ(code_of([] { measures::parse_measure("min-entropy"); }), Errc::InvalidArgument);
}

TEST(Measures, ElementaryCompareUsesTheMeasureDirection) {
  const HyperDist s = threebox("threebox_S.hprog"), i1 = threebox("threebox_I1.hprog");
  EXPECT_TRUE(measures::elementary_compare(s, i1, measures::Measure::bayes()).holds());
  EXPECT_EQ(measures::elementary_compare(i1, s, measures::Measure::bayes()).kind, measures::Verdict::Kind::FailsMeasure);
  EXPECT_TRUE(measures::elementary_compare(s, i1, measures::Measure::guessing_entropy()).holds());
  EXPECT_TRUE(measures::elementary_compare(s, s, measures::Measure::shannon()).holds());
}

TEST(Measures, ElementaryCompareDetectsFunctionalChange) {
  const std::string decl = "vis v : {w, b, bot}; hid h : {0..2};\n";
  const HyperDist a = eval_at(decl + "v := bot", "v=bot; h~uniform");
  const HyperDist b = eval_at(decl + "v := w", "v=bot; h~uniform");
  EXPECT_EQ(measures::elementary_compare(a, b, measures::Measure::bayes()).kind,
            measures::Verdict::Kind::FailsFunctional);
}

// lp

TEST(Simplex, FindsTheExactOptimum) {
  lp::LinearProgram p(2);
  p.objective = {1, 1};
  p.add({1, 2}, lp::Relation::Le, 4);
  p.add({3, 1}, lp::Relation::Le, 6);
  const auto opt = lp::solve_max(p);
  EXPECT_EQ(opt.value, Rational(14, 5));
  EXPECT_EQ(opt.point, (std::vector<Rational>{Rational(8, 5), Rational(6, 5)}));
}

TEST(Simplex, HandlesFreeAndBoundedVariables) {
  lp::LinearProgram p(2);
  p.objective = {-1, 1};
  p.lower[0] = std::nullopt;
  p.lower[1] = Rational(-1);
  p.upper[1] = Rational(1);
  p.add({1, 1}, lp::Relation::Ge, -3);
  const auto opt = lp::solve_max(p);
  EXPECT_EQ(opt.value, Rational(5));
}

TEST(Simplex, InfeasibleProgramsCarryAFarkasCertificate) {
  lp::LinearProgram p(2);
  p.add({1, 1}, lp::Relation::Eq, 1);
  p.add({1, 0}, lp::Relation::Ge, 2);
  const auto res = lp::solve_feasibility(p);
  ASSERT_FALSE(res.feasible);
  EXPECT_TRUE(lp::is_infeasibility_certificate(p, res.certificate));
  EXPECT_EQ(code_of([&] { lp::solve_max(p); }), Errc::Infeasible);
}

TEST(Simplex, ReportsUnboundedObjectives) {
  lp::LinearProgram p(2);
  p.objective = {1, 0};
  p.add({1, -1}, lp::Relation::Le, 1);
  EXPECT_EQ(code_of([&] { lp::solve_max(p); }), Errc::Unbounded);
}

TEST(Simplex, FeasiblePointsSatisfyEveryRow) {
  lp::LinearProgram p(3);
  p.add({1, 1, 1}, lp::Relation::Eq, 1);
  p.add({1, -1, 0}, lp::Relation::Ge, Rational(1, 3));
  const auto res = lp::solve_feasibility(p);
  ASSERT_TRUE(res.feasible);
  EXPECT_TRUE(lp::satisfies(p, res.point));
}

// refine

TEST(Refinement, MergingInnersRefines) {
  const HyperDist s = threebox("threebox_S.hprog"), i1 = threebox("threebox_I1.hprog");
  const auto r = refine::check_refinement(s, i1);
  ASSERT_TRUE(r.refined);
  ASSERT_EQ(r.witness.size(), 1u);
  EXPECT_TRUE(refine::verify_witness(r.witness[0].r, r.witness[0].source, r.witness[0].target));
  const auto back = refine::check_refinement(i1, s);
  EXPECT_FALSE(back.refined);
  EXPECT_FALSE(back.functional_mismatch);
  ASSERT_TRUE(back.failing_v.has_value());
  EXPECT_FALSE(back.certificate.empty());
}

TEST(Refinement, RefinementIsReflexive) {
  for (const char* name : {"threebox_S.hprog", "threebox_I1.hprog", "threebox_I2.hprog"}) {
    const HyperDist d = threebox(name);
    EXPECT_TRUE(refine::check_refinement(d, d).refined) << name;
  }
}

TEST(Refinement, FunctionalMismatchIsReportedSeparately) {
  const std::string decl = "vis v : {w, b, bot}; hid h : {0..2};\n";
  const auto r = refine::check_refinement(eval_at(decl + "v := bot", "v=bot; h~uniform"),
                                          eval_at(decl + "v := w", "v=bot; h~uniform"));
  EXPECT_FALSE(r.refined);
  EXPECT_TRUE(r.functional_mismatch);
}

TEST(Refinement, SimilarPartitionsDifferOnlyByScaling) {
  const Partition a = partition({{Rational(1, 4), Rational(1, 4)}, {0, Rational(1, 2)}});
  const Partition b = partition({{Rational(1, 8), Rational(1, 8)}, {Rational(1, 8), Rational(1, 8)}, {0, Rational(1, 2)}});
  EXPECT_TRUE(refine::similar(a, b));
  EXPECT_FALSE(refine::similar(a, partition({{Rational(1, 2), Rational(1, 2)}})));
  EXPECT_EQ(refine::bv_partition(a), Rational(3, 4));
}

TEST(Refinement, WitnessVerificationRejectsWrongMatrices) {
  const Partition src = partition({{Rational(1, 2), 0}, {0, Rational(1, 2)}});
  const Partition dst = partition({{Rational(1, 2), Rational(1, 2)}});
  EXPECT_TRUE(refine::verify_witness(RatMatrix::from_rows({{1, 1}}), src, dst));
  EXPECT_FALSE(refine::verify_witness(RatMatrix::from_rows({{1, 0}}), src, dst));
  EXPECT_FALSE(refine::check_partition(dst, src).refined);
}

TEST(Decomposition, RebuildsTheMatrixFromSimpleParts) {
  const RatMatrix r = RatMatrix::from_rows({{Rational(1, 2), Rational(1, 3), 0},
                                            {Rational(1, 4), Rational(2, 3), 1},
                                            {Rational(1, 4), 0, 0}});
  const auto parts = refine::decompose_refinement(r);
  RatMatrix sum(3, 3);
  Rational total = 0;
  for (const auto& [c, m] : parts) {
    EXPECT_GT(c, 0);
    EXPECT_TRUE(m.is_simple());
    sum = sum + c * m;
    total += c;
  }
  EXPECT_EQ(total, 1);
  EXPECT_EQ(sum, r);
}

TEST(Decomposition, RejectsNonRefinementMatrices) {
  EXPECT_EQ(code_of([] { refine::decompose_refinement(RatMatrix::from_rows({{Rational(1, 2)}, {Rational(1, 3)}})); }),
            Errc::NotRefinementMatrix);
  EXPECT_EQ(code_of([] { refine::decompose_refinement(RatMatrix::from_rows({{2}, {-1}})); }), Errc::NotRefinementMatrix);
}

// attack

TEST(Attack, DirectionSeparatesTargetFromEveryVertex) {
  const Partition src = partition({{Rational(1, 2), Rational(1, 2)}});
  const Partition dst = partition({{Rational(1, 2), 0}, {0, Rational(1, 2)}});
  const auto dir = attack::separating_direction(src, dst);
  EXPECT_GT(dir.margin, 0);
  EXPECT_EQ(dir.margin, attack::separation_margin(src, dst, dir.x, dir.columns));
  EXPECT_EQ(attack::vertex_count(src, dst), 2u);
}

TEST(Attack, VertexScoreTakesTheBestRowPerFraction) {
  const RatMatrix x = RatMatrix::from_rows({{1, -1}, {-1, 3}});
  const RatMatrix s = RatMatrix::from_rows({{1, 0}, {0, 2}});
  EXPECT_EQ(attack::vertex_max(s, x), Rational(1 + 6));
  EXPECT_EQ(attack::dot(x, s), Rational(1 + 6));
  EXPECT_EQ(attack::dot(x, RatMatrix::from_rows({{0, 1}, {1, 0}})), Rational(-2));
}

TEST(Attack, EnumerationRespectsTheVertexCap) {
  const Partition src = partition({{Rational(1, 2), Rational(1, 2)}});
  const Partition dst = partition({{Rational(1, 2), 0}, {0, Rational(1, 2)}});
  EXPECT_EQ(code_of([&] { attack::separating_direction(src, dst, 1); }), Errc::VertexBudgetExceeded);
  EXPECT_GT(attack::farkas_direction(src, dst).margin, 0);
  EXPECT_EQ(code_of([&] { attack::separating_direction(dst, src); }), Errc::NotSeparable);
}

TEST(Attack, PreconditionsAreChecked) {
  const auto p2 = lang::parse(corpus("P2.hprog")), p4 = lang::parse(corpus("P4.hprog"));
  const auto c = semantics::compile(p2);
  const auto init = cli::expand(cli::parse_init_spec("v=0; h~uniform"), *c.layout).front().state;
  EXPECT_EQ(code_of([&] { attack::prepare_attack(p2, p4, init); }), Errc::PreconditionViolated);
  const auto other = lang::parse("vis v : {0..4}; hid h : {1..3};\nv := 4");
  EXPECT_EQ(code_of([&] { attack::prepare_attack(p2, other, init); }), Errc::PreconditionViolated);
}

TEST(Attack, SynthesizedContextsDistinguishP4FromP2) {
  const auto p2 = lang::parse(corpus("P2.hprog")), p4 = lang::parse(corpus("P4.hprog"));
  const auto c = semantics::compile(p4);
  const auto init = cli::expand(cli::parse_init_spec("v=0; h~uniform"), *c.layout).front().state;
  const auto vertex = attack::synthesize_and_verify(p4, p2, init);
  EXPECT_TRUE(vertex.verdict);
  EXPECT_EQ(vertex.method, "vertex");
  EXPECT_TRUE(vertex.channel.rows_valid());
  const auto cert = attack::synthesize_and_verify(p4, p2, init, {attack::kDefaultVertexCap, true});
  EXPECT_TRUE(cert.verdict);
  EXPECT_EQ(cert.method, "certificate");
  const auto capped = attack::synthesize_and_verify(p4, p2, init, {1, false});
  EXPECT_TRUE(capped.verdict);
  EXPECT_EQ(capped.method, "certificate");
  EXPECT_NO_THROW(lang::parse(vertex.context_source));
}

TEST(Attack, FractionsOnZeroTargetColumnsStillLeakThroughTheChannel) {
  const std::string decl = "vis v : {0..2};\nhid h : {0..3};\n";
  auto prog = [&](const char* row) {
    return decl + "v <- " + row + ";\nv := (1 if h = 0 else 0)\n";
  };
  const auto s = lang::parse(prog("{0 @ (2/3 if h = 0 else (0 if h = 1 else (1/2 if h = 2 else 3/7))), "
                                  "1 @ (1/3 if h = 0 else (1 if h = 1 else (0 if h = 2 else 4/7))), "
                                  "2 @ (0 if h = 0 else (0 if h = 1 else (1/2 if h = 2 else 0)))}"));
  const auto i = lang::parse(prog("{0 @ (0 if h = 0 else (4/9 if h = 1 else (1/3 if h = 2 else 3/7))), "
                                  "1 @ (1 if h = 0 else (2/9 if h = 1 else (2/3 if h = 2 else 3/7))), "
                                  "2 @ (0 if h = 0 else (1/3 if h = 1 else (0 if h = 2 else 1/7)))}"));
  const auto c = semantics::compile(s);
  const auto init = cli::expand(cli::parse_init_spec("v=0; h~uniform"), *c.layout).front().state;
  const auto inst = attack::prepare_attack(s, i, init);
  const auto r = attack::synthesize_and_verify(s, i, init);
  EXPECT_TRUE(r.verdict) << to_string(r.bv_i) << " vs " << to_string(r.bv_s);
  EXPECT_TRUE(attack::extended_columns_idle(r.channel, inst.source, inst.target));
}

// cli

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "hyperflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  return code;
}

TEST(Cli, MeasurePrintsExactValues) {
  std::string out;
  EXPECT_EQ(run({"measure", (kCorpus / "threebox_S.hprog").string(), "--init", "v=bot; h~uniform"}, &out), cli::kOk);
  EXPECT_NE(out.find("\"value\":\"2/3\""), std::string::npos) << out;
}

TEST(Cli, CompareExitCodeFollowsTheVerdict) {
  const std::string p2 = (kCorpus / "P2.hprog").string(), p4 = (kCorpus / "P4.hprog").string();
  EXPECT_EQ(run({"compare", p2, p4, "--init", "v=0; h~uniform"}), cli::kOk);
  EXPECT_EQ(run({"compare", p4, p2, "--init", "v=0; h~uniform"}), cli::kFails);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({}), cli::kUsage);
  EXPECT_EQ(run({"measure"}), cli::kUsage);
  EXPECT_EQ(run({"measure", "/nonexistent.hprog", "--init", "v=0"}), cli::kUsage);
  EXPECT_EQ(run({"measure", (kCorpus / "P2.hprog").string(), "--init", "v=0; h~uniform", "--measure", "nope"}),
            cli::kUsage);
}

TEST(Cli, AttackReportsAVerifiedContext) {
  std::string out;
  EXPECT_EQ(run({"attack", (kCorpus / "P4.hprog").string(), (kCorpus / "P2.hprog").string(), "--init", "v=0; h~uniform"},
                &out),
            cli::kOk);
  EXPECT_NE(out.find("\"verdict\": true"), std::string::npos) << out;
}

}  // namespace
}  // namespace hyperflow
