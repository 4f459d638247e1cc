#include <gtest/gtest.h>

#include "support/fixtures.hpp"

namespace hyperflow::testing {
namespace {

void expect_ok(const SuiteResult& r) {
  EXPECT_TRUE(r.ok) << r.detail;
  EXPECT_GT(r.cases, 0u);
}

class Seeded : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(Seeded, RefinementIsAPreorderAndMergingRefines) { expect_ok(order_laws(300, GetParam())); }

TEST_P(Seeded, ContextsPreserveRefinement) { expect_ok(monotonicity(150, GetParam())); }

TEST_P(Seeded, RefinementImpliesEveryMeasureOrder) { expect_ok(measure_soundness(300, GetParam())); }

TEST_P(Seeded, EveryFailedRefinementHasADistinguishingContext) {
  std::size_t hits = 0;
  expect_ok(completeness(100, GetParam(), &hits));
  EXPECT_GT(hits, 0u);
}

TEST_P(Seeded, BayesFailureFollowsAnyMeasureFailure) { expect_ok(maximal_discrimination(100, GetParam())); }

TEST_P(Seeded, RefinementMatricesDecomposeIntoSimpleOnes) { expect_ok(decomposition(200, GetParam())); }

TEST_P(Seeded, DirectAndNormalFormEvaluationAgree) { expect_ok(eval_vs_normal_form(80, GetParam())); }

INSTANTIATE_TEST_SUITE_P(Seeds, Seeded, ::testing::Values(101u, 202u, 303u));

}  // namespace
}  // namespace hyperflow::testing
