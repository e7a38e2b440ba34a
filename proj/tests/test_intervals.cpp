#include <random>

#include <gtest/gtest.h>

#include "elbandit/intervals.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace elbandit;
using namespace testing_support;

namespace {

double binomial_log_el(double k, double n, double v) {
  double out = 0.0;
  if (k > 0) out += k * std::log(n * v / k);
  if (n - k > 0) out += (n - k) * std::log(n * (1.0 - v) / (n - k));
  return out;
}

LoggedDataset bernoulli_unit_weights(std::size_t n, std::uint64_t seed, std::pair<double, double> box) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  Vector r(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = coin(rng) ? 1.0 : 0.0;
  return build_dataset(Matrix::Ones(r.size(), 1), r, BoxSupport({box}));
}

}  // namespace

TEST(NormalQuantile, MatchesHighPrecisionValues) {
  const std::pair<double, double> cases[] = {
      {0.975, 1.959963984540053855604431},     {1e-10, -6.361340902404056199100397},
      {0.02425, -1.972961051311884837602748},  {0.3, -0.5244005127080408159694544},
      {0.999999, 4.753424308817087765688097},  {1.0 - 1e-12, 7.034486910047835205692401}};
  for (const auto& [p, z] : cases) EXPECT_NEAR(normal_quantile(p), z, 1e-13 * std::abs(z) + 1e-15) << p;
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  EXPECT_TRUE(std::isinf(normal_quantile(0.0)));
  EXPECT_TRUE(std::isnan(normal_quantile(1.5)));
}

TEST(Chi2Quantile, ClosedFormsAndHighPrecisionValues) {
  EXPECT_EQ(chi2_quantile(1, 0.0), 0.0);
  EXPECT_EQ(chi2_quantile(2, 0.0), 0.0);
  EXPECT_NEAR(chi2_quantile(2, 0.9999), 18.420680743952365472, 1e-11);
  EXPECT_NEAR(chi2_quantile(1, 0.95), 3.8414588206941244691, 1e-12);
  EXPECT_NEAR(chi2_quantile(1, 0.90), 2.7055434540954149212, 1e-12);
  EXPECT_NEAR(chi2_quantile(1, 0.9999), 15.136705226623605001, 1e-11);
  EXPECT_NEAR(chi2_quantile(1, 0.99), 6.6348966010212135563, 1e-12);
  EXPECT_NEAR(chi2_quantile(1, 0.999), 10.827566170662730649, 1e-11);
  EXPECT_NEAR(chi2_quantile(1, 0.5), 0.45493642311957275194, 1e-13);
}

TEST(Chi2Quantile, RejectsUnsupportedInput) {
  expect_error([] { chi2_quantile(3, 0.5); }, ErrorCode::UnsupportedDf);
  expect_error([] { chi2_quantile(1, 1.0); }, ErrorCode::InvalidArgument);
  expect_error([] { chi2_quantile(1, -0.1); }, ErrorCode::InvalidArgument);
}

TEST(Wilks, RelativeLikelihoodThresholdAtFivePercent) {
  const WilksInterval w = wilks_interval(canonical(), 0.05);
  EXPECT_NEAR(w.threshold_log, -0.5 * 3.8414588206941244691, 1e-12);
  EXPECT_NEAR(std::exp(w.threshold_log), 0.146500064486084, 1e-12);
}

TEST(Wilks, UnitWeightsMatchBinomialGridScan) {
  const LoggedDataset ds = bernoulli_unit_weights(500, 3, {1.0, 1.0});
  const double k = ds.rewards().sum();
  for (double alpha : {0.05, 0.10}) {
    const WilksInterval w = wilks_interval(ds, alpha);
    const double level = -0.5 * chi2_quantile(1, 1.0 - alpha);
    const auto scan = oracle::grid_superlevel(
        [&](double v) { return binomial_log_el(k, 500.0, v); }, level, 0.0, 1.0, 200000);
    EXPECT_NEAR(w.lo, scan.first, 1e-4);
    EXPECT_NEAR(w.hi, scan.second, 1e-4);
  }
}

TEST(Wilks, WideBoxMatchesGridScanOfLogElCurve) {
  const LoggedDataset ds = bernoulli_unit_weights(60, 5, {0.0, 4.0});
  const ElEvaluator ev(ds);
  const double max = ev.mele().max_loglik.value();
  const WilksInterval w = wilks_interval(ev, 0.05);
  const double level = max - 0.5 * chi2_quantile(1, 0.95);
  auto curve = [&](double v) { return ev.value(vec({v})).loglik.value(); };
  const auto scan = oracle::grid_superlevel(curve, level, 0.0, 1.0, 4000);
  EXPECT_NEAR(w.lo, scan.first, 2.5e-4);
  EXPECT_NEAR(w.hi, scan.second, 2.5e-4);
  const double centre = ev.mele().value_lo(0);
  EXPECT_NEAR(w.lo, oracle::bisect_crossing(curve, level, centre, 0.0), 1e-6);
  EXPECT_NEAR(w.hi, oracle::bisect_crossing(curve, level, centre, 1.0), 1e-6);
}

TEST(Wilks, ContainsMeleAndNests) {
  const ElEvaluator ev(canonical());
  const WilksInterval w90 = wilks_interval(ev, 0.10);
  const WilksInterval w95 = wilks_interval(ev, 0.05);
  EXPECT_LE(w95.lo, ev.mele().value_lo(0));
  EXPECT_GE(w95.hi, ev.mele().value_hi(0));
  EXPECT_TRUE(w95.interval().contains(w90.interval()));
  EXPECT_GT(w90.width(), 0.0);
}

TEST(Wilks, RejectsInvalidInput) {
  expect_error([] { wilks_interval(canonical_two(), 0.05); }, ErrorCode::WrongPolicyCount);
  expect_error([] { wilks_interval(canonical(), 0.0); }, ErrorCode::InvalidArgument);
  expect_error([] { wilks_interval(canonical(), 1.0); }, ErrorCode::InvalidArgument);
}

TEST(IntervalType, Basics) {
  const Interval a{0.2, 0.6};
  EXPECT_DOUBLE_EQ(a.width(), 0.4);
  EXPECT_TRUE(a.contains(0.2));
  EXPECT_FALSE(a.contains(0.61));
  EXPECT_TRUE(a.contains(Interval{0.3, 0.5}));
  EXPECT_FALSE(a.contains(Interval{0.1, 0.5}));
}
