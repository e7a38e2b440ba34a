#include <gtest/gtest.h>

#include "elbandit/dataset.hpp"
#include "test_helpers.hpp"

using namespace elbandit;
using namespace testing_support;

TEST(Dataset, CollapsedBoxIsValid) {
  const LoggedDataset ds = build_dataset(column({1.0, 1.0}), vec({0.0, 1.0}), BoxSupport({{1.0, 1.0}}));
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.policy_count(), 1u);
  EXPECT_TRUE(ds.support().collapsed(0));
}

TEST(Dataset, CanonicalFixtureIsValid) {
  const LoggedDataset ds = canonical();
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_DOUBLE_EQ(ds.weights()(1, 0), 1.5);
  const LoggedSample s = sample_at(ds, 0);
  EXPECT_EQ(s.reward, 1.0);
  EXPECT_EQ(s.weights(0), 0.5);
}

TEST(Dataset, WeightOutsideSupportNamesRowAndColumn) {
  expect_error([] { build_dataset(column({2.5}), vec({0.5}), BoxSupport({{0.0, 2.0}})); },
               ErrorCode::WeightOutsideSupport, "row 1, column 1");
}

TEST(Dataset, RejectsBadRewardsAndShapes) {
  expect_error([] { build_dataset(column({1.0, 1.0}), vec({0.0, 1.5}), BoxSupport({{0.0, 2.0}})); },
               ErrorCode::RewardOutOfRange, "row 2");
  expect_error([] { build_dataset(column({1.0, 1.0}), vec({0.0, -0.1}), BoxSupport({{0.0, 2.0}})); },
               ErrorCode::RewardOutOfRange);
  expect_error([] { build_dataset(column({1.0}), vec({0.0}), BoxSupport({{0.0, 2.0}})); },
               ErrorCode::TooFewSamples);
  expect_error([] { build_dataset(column({1.0, 1.0}), vec({0.0}), BoxSupport({{0.0, 2.0}})); },
               ErrorCode::DimensionMismatch);
  expect_error([] { build_dataset(column({1.0, 1.0}), vec({0.0, 1.0}), BoxSupport({{0.0, 2.0}, {0.0, 2.0}})); },
               ErrorCode::DimensionMismatch);
}

TEST(Dataset, RejectsInvalidBounds) {
  expect_error([] { BoxSupport({{2.0, 1.0}}); }, ErrorCode::InvalidArgument);
  expect_error([] { BoxSupport({{-1.0, 1.0}}); }, ErrorCode::InvalidArgument);
  expect_error([] { BoxSupport(std::vector<std::pair<double, double>>{}); }, ErrorCode::InvalidArgument);
}

TEST(Dataset, SelectPolicies) {
  const LoggedDataset two = canonical_two();
  const LoggedDataset second = two.select_policies({1});
  EXPECT_EQ(second.policy_count(), 1u);
  EXPECT_EQ(second.weights()(2, 0), 1.6);
  expect_error([&] { two.select_policies({2}); }, ErrorCode::DimensionMismatch);
}

TEST(SupportVertices, OnePolicyEnumeration) {
  const auto v = support_vertices(BoxSupport({{0.0, 2.0}}));
  ASSERT_EQ(v.size(), 4u);
  const double expected[4][2] = {{0, 0}, {0, 1}, {2, 0}, {2, 1}};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(v[k].weights(0), expected[k][0]);
    EXPECT_EQ(v[k].reward, expected[k][1]);
  }
}

TEST(SupportVertices, TwoPoliciesGiveEight) {
  EXPECT_EQ(support_vertices(BoxSupport({{0.0, 2.0}, {0.0, 3.0}})).size(), 8u);
}

TEST(SupportVertices, CollapsedAxisIsDeduplicated) {
  const auto v = support_vertices(BoxSupport({{1.0, 1.0}}));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].weights(0), 1.0);
  EXPECT_EQ(v[0].reward, 0.0);
  EXPECT_EQ(v[1].reward, 1.0);
  EXPECT_EQ(support_vertices(BoxSupport({{1.0, 1.0}, {0.0, 2.0}})).size(), 4u);
}

TEST(Estimators, UnitWeightsGiveSampleMean) {
  const LoggedDataset ds = build_dataset(column({1, 1, 1, 1}), vec({1, 0, 1, 1}), BoxSupport({{1.0, 1.0}}));
  EXPECT_DOUBLE_EQ(is_estimate(ds)(0), 0.75);
  EXPECT_DOUBLE_EQ(snis_estimate(ds)(0), 0.75);
}

TEST(Estimators, CanonicalFixture) {
  EXPECT_DOUBLE_EQ(is_estimate(canonical())(0), 0.25);
  EXPECT_DOUBLE_EQ(snis_estimate(canonical())(0), 0.25);
}

TEST(Estimators, HandComputed) {
  const LoggedDataset ds = build_dataset(column({2.0, 0.0}), vec({1.0, 1.0}), BoxSupport({{0.0, 2.0}}));
  EXPECT_DOUBLE_EQ(is_estimate(ds)(0), 1.0);
  EXPECT_DOUBLE_EQ(snis_estimate(ds)(0), 1.0);
}

TEST(Estimators, ZeroWeightSum) {
  const LoggedDataset ds = build_dataset(column({0.0, 0.0}), vec({1.0, 0.0}), BoxSupport({{0.0, 2.0}}));
  EXPECT_DOUBLE_EQ(is_estimate(ds)(0), 0.0);
  expect_error([&] { snis_estimate(ds); }, ErrorCode::ZeroWeightSum);
}
