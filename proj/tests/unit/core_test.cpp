#include <gtest/gtest.h>

#include <filesystem>

#include "hyperflow/cli/golden.hpp"
#include "hyperflow/lang/ast_json.hpp"
#include "hyperflow/semantics/serialize.hpp"

namespace hyperflow {
namespace {

using cli::golden::atom;
using cli::golden::eval_at;
using cli::golden::hyper;
using cli::golden::num;
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

std::vector<lang::DiagKind> diag_kinds(const std::string& src) {
  std::vector<lang::DiagKind> out;
  for (const auto& d : lang::validate(lang::resolve_atoms(lang::parse_syntax(src)))) out.push_back(d.kind);
  return out;
}

bool has_kind(const std::vector<lang::DiagKind>& ks, lang::DiagKind k) {
  return std::find(ks.begin(), ks.end(), k) != ks.end();
}

// probcore

TEST(Rational, ParsesFractionsDecimalsAndSigns) {
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(parse_rational(" -2/4 "), Rational(-1, 2));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("7"), Rational(7));
  EXPECT_EQ(parse_rational("010"), Rational(10));
  EXPECT_EQ(parse_rational("1.05"), Rational(21, 20));
}

TEST(Rational, RejectsMalformedText) {
  EXPECT_EQ(code_of([] { parse_rational("1/0"); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_rational("x"); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_rational(""); }), Errc::InvalidArgument);
}

TEST(Rational, PrintsCanonically) {
  EXPECT_EQ(to_string(Rational(2, 4)), "1/2");
  EXPECT_EQ(to_string(Rational(3)), "3/1");
  EXPECT_EQ(to_short_string(Rational(3)), "3");
  EXPECT_EQ(to_short_string(Rational(-2, 3)), "-2/3");
}

TEST(Value, OrdersByKindThenContent) {
  EXPECT_LT(Value::boolean(false), Value::boolean(true));
  EXPECT_LT(Value::integer(-1), Value::number(Rational(1, 2)));
  EXPECT_EQ(Value::number(Rational(4, 2)), Value::integer(2));
  EXPECT_NE(Value::atom("w"), Value::atom("b"));
  EXPECT_TRUE(Value::integer(3).is_integer());
  EXPECT_FALSE(Value::number(Rational(1, 3)).is_integer());
}

TEST(FiniteDist, MergesDuplicateKeysAndSorts) {
  const auto d = mk_dist<int>({{2, Rational(1, 4)}, {1, Rational(1, 4)}, {2, Rational(1, 2)}});
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.entries().front().first, 1);
  EXPECT_EQ(d.prob(2), Rational(3, 4));
  EXPECT_TRUE(d.is_full());
  EXPECT_EQ(d.max_prob(), Rational(3, 4));
}

TEST(FiniteDist, RejectsBadWeights) {
  EXPECT_EQ(code_of([] { mk_dist<int>({{1, Rational(-1, 2)}}); }), Errc::NegativeWeight);
  EXPECT_EQ(code_of([] { mk_dist<int>({{1, Rational(3, 4)}, {2, Rational(1, 2)}}); }), Errc::WeightOverflow);
  EXPECT_EQ(code_of([] { normalize(FiniteDist<int>{}); }), Errc::ZeroWeight);
}

TEST(FiniteDist, SubDistributionsNormalize) {
  const auto d = normalize(mk_dist<int>({{1, Rational(1, 8)}, {2, Rational(3, 8)}}));
  EXPECT_EQ(d.prob(1), Rational(1, 4));
  EXPECT_EQ(d.weight(), 1);
}

TEST(FiniteDist, UniformAndPoint) {
  const auto u = FiniteDist<int>::uniform({0, 1, 2});
  EXPECT_EQ(u.prob(1), Rational(1, 3));
  EXPECT_EQ(FiniteDist<int>::point(5).prob(5), 1);
  EXPECT_EQ(u.prob(9), 0);
}

TEST(FiniteDist, PosteriorConditionsAndRejectsZeroEvidence) {
  const auto u = FiniteDist<int>::uniform({0, 1, 2, 3});
  const auto post = posterior(u, [](int k) { return k % 2 == 0; });
  EXPECT_EQ(post.prob(2), Rational(1, 2));
  EXPECT_EQ(post.prob(1), 0);
  EXPECT_EQ(code_of([&] { posterior(u, [](int) { return false; }); }), Errc::ZeroCondition);
}

// lang

TEST(Parser, CorpusRoundTripsThroughThePrinter) {
  for (const auto& entry : std::filesystem::directory_iterator(kCorpus)) {
    const lang::Program p = lang::parse(cli::read_file(entry.path()));
    const std::string printed = lang::pretty_print(p);
    const lang::Program again = lang::parse(printed);
    EXPECT_TRUE(lang::equal(p, again)) << entry.path() << "\n" << printed;
    EXPECT_EQ(lang::pretty_print(again), printed) << entry.path();
  }
}

TEST(Parser, ReportsSyntaxErrors) {
  EXPECT_EQ(code_of([] { lang::parse("vis v : bool; v := "); }), Errc::SyntaxError);
  EXPECT_EQ(code_of([] { lang::parse("vis v : bool; v = true"); }), Errc::SyntaxError);
  EXPECT_EQ(code_of([] { lang::parse("vis v : bool; if v then skip"); }), Errc::SyntaxError);
}

TEST(Parser, RejectsUndeclaredNamesAndTypeErrors) {
  EXPECT_EQ(code_of([] { lang::parse("vis v : bool; v := w"); }), Errc::UndeclaredVariable);
  EXPECT_EQ(code_of([] { lang::parse("vis v : bool; hid h : {0..2}; v := h + true"); }), Errc::TypeMismatch);
}

TEST(Parser, UndeclaredAtomInDomainIsAValue) {
  const auto p = lang::parse("vis v : {w, b}; v := w");
  EXPECT_FALSE(lang::has_errors(lang::validate(p)));
}

TEST(Parser, DistributionMixtureFlattensToExplicit) {
  const std::string decl = "hid h : {0..2};\n";
  const HyperDist mixed = eval_at(decl + "h <- uniform{0, 1} [1/2] {2 @ 1}", "h=0");
  const HyperDist flat = eval_at(decl + "h <- {0 @ 1/4, 1 @ 1/4, 2 @ 1/2}", "h=0");
  EXPECT_EQ(mixed, flat);
}

TEST(Parser, BracketAfterStatementStaysAChoice) {
  const auto p = lang::parse("vis v : {0, 1}; v := 0 [1/3] v := 1");
  EXPECT_TRUE(std::holds_alternative<lang::Choice>(p.body->node));
}

TEST(Parser, CommentsAndPrimesAreAccepted) {
  const auto p = lang::parse("// header\nvis v' : bool; // trailing\nv' := true");
  EXPECT_EQ(p.globals.front().name, "v'");
}

TEST(Validator, FlagsWeightsThatDoNotSumToOne) {
  EXPECT_TRUE(has_kind(diag_kinds("vis v : {0, 1}; v <- {0 @ 1/2, 1 @ 1/3}"), lang::DiagKind::WeightsNotOneSumming));
  EXPECT_TRUE(has_kind(diag_kinds("vis v : {0, 1}; v <- {0 @ -1/2, 1 @ 3/2}"), lang::DiagKind::NegativeWeight));
}

TEST(Validator, FlagsDuplicatesAndUnknownAgents) {
  EXPECT_TRUE(has_kind(diag_kinds("vis v : bool; hid v : bool; skip"), lang::DiagKind::DuplicateVariable));
  EXPECT_TRUE(has_kind(diag_kinds("agents A; vis {B} v : bool; skip"), lang::DiagKind::UnknownAgent));
}

TEST(Validator, DiagnosticsRenderKindAndMessage) {
  const auto ds = lang::validate(lang::resolve_atoms(lang::parse_syntax("vis v : {0, 1}; v <- {0 @ 1/2, 1 @ 1/3}")));
  ASSERT_FALSE(ds.empty());
  EXPECT_NE(lang::to_string(ds.front()).find("WeightsNotOneSumming"), std::string::npos);
  EXPECT_TRUE(lang::has_errors(ds));
}

TEST(Views, AgentSeesOnlyItsOwnVariables) {
  const auto p = lang::parse(cli::read_file(kCorpus / "three_judges_fig2.hprog"));
  const auto view = lang::project_view(p, "B");
  const std::string text = lang::pretty_print(view);
  EXPECT_NE(text.find("vis b : bool"), std::string::npos);
  EXPECT_NE(text.find("hid a : bool"), std::string::npos);
  EXPECT_EQ(code_of([&] { lang::project_view(p, "Z"); }), Errc::UnknownAgent);
}

TEST(AstJson, NamesEveryStatementKind) {
  const auto p = lang::parse(cli::read_file(kCorpus / "encryption_lemma.hprog"));
  const std::string j = lang::program_json(p).dump();
  EXPECT_NE(j.find("\"xor_assign\""), std::string::npos);
  EXPECT_NE(j.find("\"local\""), std::string::npos);
}

// semantics

TEST(Semantics, ThreeBoxReferenceProgram) {
  const HyperDist d = eval_at(cli::read_file(kCorpus / "threebox_S.hprog"), "v=bot; h~uniform");
  const HyperDist want =
      hyper(d.layout, {{Rational(1, 2), {atom("bot")}, {{{num(1)}, Rational(1, 3)}, {{num(2)}, Rational(2, 3)}}},
                       {Rational(1, 2), {atom("bot")}, {{{num(0)}, Rational(2, 3)}, {{num(1)}, Rational(1, 3)}}}});
  EXPECT_EQ(d, want) << semantics::to_text(d);
}

TEST(Semantics, GeneralChoiceObservesTheBranch) {
  const HyperDist d = eval_at(cli::read_file(kCorpus / "general_choice.hprog"), "v=0; h~uniform");
  const HyperDist want = hyper(d.layout, {{Rational(3, 8), {num(0)}, {{{num(1, 4)}, Rational(1, 3)}, {{num(1, 2)}, Rational(2, 3)}}},
                                          {Rational(5, 8), {num(0)}, {{{num(1, 4)}, Rational(3, 5)}, {{num(1, 2)}, Rational(2, 5)}}}});
  EXPECT_EQ(d, want) << semantics::to_text(d);
}

TEST(Semantics, VisibleAssignmentSplitsTheHiddenState) {
  const HyperDist d = eval_at("vis v : bool; hid h : {0..3};\nv := h < 2", "v=false; h~uniform");
  ASSERT_EQ(d.outer.size(), 2u);
  for (const auto& [s, p] : d.outer) {
    EXPECT_EQ(p, Rational(1, 2));
    EXPECT_EQ(s.delta.size(), 2u);
  }
}

TEST(Semantics, HiddenChoiceStaysInOneInner) {
  const HyperDist d = eval_at("vis v : bool; hid h : {0..3};\nh <- uniform{0, 1}", "v=false; h=3");
  ASSERT_EQ(d.outer.size(), 1u);
  EXPECT_EQ(d.outer.entries().front().first.delta.size(), 2u);
}

TEST(Semantics, EncryptionLemmaEqualsSkip) {
  const std::string init = "e~{true@1/3, false@2/3}";
  const HyperDist lemma = eval_at(cli::read_file(kCorpus / "encryption_lemma.hprog"), init);
  const HyperDist skip = eval_at("hid e : bool;\nskip", init);
  EXPECT_EQ(lemma, skip);
}

TEST(Semantics, NormalFormAgreesOnTheCorpus) {
  const std::pair<const char*, const char*> cases[] = {{"threebox_S.hprog", "v=bot; *~points"},
                                                       {"threebox_I2.hprog", "v=w; *~points"},
                                                       {"P2.hprog", "v=0; *~points"},
                                                       {"P4.hprog", "v=3; *~points"},
                                                       {"general_choice.hprog", "v=0; *~points"}};
  for (const auto& [name, init] : cases) {
    const auto c = semantics::compile(lang::parse(cli::read_file(kCorpus / name)));
    const auto nf = semantics::normal_form(c);
    for (const auto& pt : cli::expand(cli::parse_init_spec(init), *c.layout))
      EXPECT_EQ(semantics::eval(c, pt.state), semantics::eval_via_normal_form(nf, pt.state)) << name << " " << pt.label;
  }
}

TEST(Semantics, NormalFormRejectsLocalBlocks) {
  const auto c = semantics::compile(lang::parse(cli::read_file(kCorpus / "encryption_lemma.hprog")));
  EXPECT_EQ(code_of([&] { semantics::normal_form(c); }), Errc::UnsupportedConstruct);
}

TEST(Semantics, JsonListsEveryInner) {
  const HyperDist d = eval_at(cli::read_file(kCorpus / "threebox_I2.hprog"), "v=bot; h~uniform");
  const auto j = semantics::to_json(d);
  ASSERT_TRUE(j.contains("hyper"));
  EXPECT_EQ(j["hyper"].size(), 2u);
}

TEST(Semantics, OutOfDomainAssignmentIsReported) {
  EXPECT_EQ(code_of([] { eval_at("vis v : {0, 1};\nv := 2", "v=0"); }), Errc::ValueOutOfDomain);
}

TEST(InitSpec, ExpandsPointsUniformAndExplicitPriors) {
  const auto c = semantics::compile(lang::parse("vis v : {0, 1}; hid h : {0..2}; hid g : bool;\nskip"));
  const auto pts = cli::expand(cli::parse_init_spec("v=1; h~{0@1/4, 2@3/4}; g~uniform"), *c.layout);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts.front().state.delta.size(), 4u);
  EXPECT_EQ(cli::expand(cli::parse_init_spec("v=0; *~points"), *c.layout).size(), 3u * 2u);
  EXPECT_EQ(cli::expand(cli::parse_init_spec("v=0; *~sample:4", 9), *c.layout).size(), 4u);
}

TEST(InitSpec, SamplesAreReproducibleFromTheSeed) {
  const auto c = semantics::compile(lang::parse("vis v : {0}; hid h : {0..4};\nskip"));
  const auto a = cli::expand(cli::parse_init_spec("v=0; h~sample:3", 5), *c.layout);
  const auto b = cli::expand(cli::parse_init_spec("v=0; h~sample:3", 5), *c.layout);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].state, b[k].state);
}

TEST(InitSpec, RejectsValuesOutsideTheDomain) {
  const auto c = semantics::compile(lang::parse("vis v : {0, 1}; hid h : {0..2};\nskip"));
  EXPECT_EQ(code_of([&] { cli::expand(cli::parse_init_spec("v=7; h~uniform"), *c.layout); }), Errc::ValueOutOfDomain);
}

}  // namespace
}  // namespace hyperflow
