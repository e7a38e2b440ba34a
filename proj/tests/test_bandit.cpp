#include <random>
#include <set>

#include <gtest/gtest.h>

#include "elbandit/bandit.hpp"
#include "test_helpers.hpp"

using namespace elbandit;
using namespace testing_support;

namespace {

LearnedPolicy fixed_policy(const std::vector<double>& ub, double s, int k_prime) {
  LearnedPolicy p;
  p.m = 0.0;
  p.s = s;
  p.k_prime = k_prime;
  for (double u : ub) {
    ArmFit fit;
    fit.b0 = std::log(u / (1.0 - u));
    fit.fisher = Matrix::Identity(2, 2);
    p.arms.push_back(fit);
  }
  return p;
}

}  // namespace

TEST(Seeds, DerivedStreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 1; s <= 7; ++s) {
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(42, s, i));
  }
  EXPECT_EQ(seen.size(), 350u);
  EXPECT_EQ(derive_seed(42, 3, 9), derive_seed(42, 3, 9));
  EXPECT_NE(derive_seed(42, 3, 9), derive_seed(43, 3, 9));
  std::uint64_t state = 0;
  EXPECT_EQ(splitmix64(state), 0xE220A8397B1DCDAFULL);
}

TEST(Context, SharedPartLiesOnSimplex) {
  const BanditEnvironment env;
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const ContextDraw c = sample_context(env, rng);
    EXPECT_NEAR(c.shared.sum(), 1.0, 1e-12);
    EXPECT_GE(c.shared.minCoeff(), 0.0);
    EXPECT_EQ(c.arm_features.rows(), 10);
    EXPECT_EQ(c.arm_features.cols(), 12);
    EXPECT_NEAR((c.z - c.arm_features * c.shared).norm(), 0.0, 1e-14);
  }
}

TEST(Context, MomentsOverManyDraws) {
  const BanditEnvironment env;
  Rng rng(2);
  constexpr int kDraws = 100000;
  Vector shared_mean = Vector::Zero(12);
  Vector feat_mean = Vector::Zero(12);
  Vector feat_sq = Vector::Zero(12);
  for (int t = 0; t < kDraws; ++t) {
    const ContextDraw c = sample_context(env, rng);
    shared_mean += c.shared;
    feat_mean += c.arm_features.row(0).transpose();
    feat_sq += c.arm_features.row(0).transpose().cwiseAbs2();
  }
  shared_mean /= kDraws;
  feat_mean /= kDraws;
  feat_sq /= kDraws;
  for (Eigen::Index k = 0; k < 12; ++k) {
    EXPECT_NEAR(shared_mean(k), 1.0 / 12.0, 0.002);
    EXPECT_NEAR(feat_mean(k), 0.0, 0.02);
    EXPECT_NEAR(feat_sq(k) - feat_mean(k) * feat_mean(k), 1.0, 0.03);
  }
}

TEST(RewardModel, LogisticValues) {
  BanditEnvironment env;
  EXPECT_DOUBLE_EQ(true_arm_probs(env, Vector::Zero(10))(3), 0.5);
  EXPECT_NEAR(true_arm_probs(env, Vector::Ones(10))(0), 0.952574126822433, 1e-15);
  env.beta1 = 0.0;
  env.beta0 = 0.7;
  const Vector p = true_arm_probs(env, vec({-2, 0, 1, 5, 0, 0, 0, 0, 0, 0}));
  EXPECT_TRUE((p.array() == logistic(0.7)).all());
  EXPECT_NEAR(log_logistic(-800.0), -800.0, 1e-12);
  EXPECT_NEAR(std::exp(log_logistic(1.0)), 0.731058578630005, 1e-15);
}

TEST(Environment, Validation) {
  BanditEnvironment env;
  env.arms = 1;
  expect_error([&] { env.validate(); }, ErrorCode::InvalidArgument);
  env = BanditEnvironment{};
  env.beta1 = std::nan("");
  expect_error([&] { env.validate(); }, ErrorCode::InvalidArgument);
}

TEST(Logging, UniformArmsBinaryRewardsDeterministic) {
  const BanditEnvironment env;
  const auto log = generate_log(env, 10000, 17);
  std::vector<int> counts(10, 0);
  for (const RoundLog& r : log) {
    ++counts[static_cast<std::size_t>(r.arm)];
    EXPECT_TRUE(r.reward == 0.0 || r.reward == 1.0);
    EXPECT_DOUBLE_EQ(r.behavior_prob, 0.1);
  }
  const double sd = std::sqrt(10000 * 0.1 * 0.9);
  for (int c : counts) EXPECT_NEAR(c, 1000.0, 3.0 * sd);
  const auto again = generate_log(env, 10000, 17);
  for (std::size_t i = 0; i < log.size(); ++i) {
    ASSERT_EQ(log[i].arm, again[i].arm);
    ASSERT_EQ(log[i].reward, again[i].reward);
    ASSERT_TRUE((log[i].z.array() == again[i].z.array()).all());
  }
}

TEST(LogisticFit, InterceptOnly) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 400; ++i) pairs.emplace_back(0.0, i % 4 == 0 ? 1.0 : 0.0);
  const ArmFit fit = fit_arm_logistic(pairs);
  EXPECT_TRUE(fit.converged);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.b1, 0.0);
  EXPECT_NEAR(fit.b0, std::log(0.25 / 0.75), 1e-3);
}

TEST(LogisticFit, SeparatedDataStaysFinite) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = -20; i <= 20; ++i) {
    if (i != 0) pairs.emplace_back(0.05 * i, i > 0 ? 1.0 : 0.0);
  }
  const ArmFit fit = fit_arm_logistic(pairs);
  EXPECT_TRUE(fit.converged);
  EXPECT_TRUE(std::isfinite(fit.b0));
  EXPECT_TRUE(std::isfinite(fit.b1));
  EXPECT_GT(fit.b1, 10.0);
  EXPECT_LT(fit.b1 * fit.b1 + fit.b0 * fit.b0, 2.0 * 40.0 * std::log(2.0) / kLogisticRidge);
}

TEST(LogisticFit, RecoversGenerativeCoefficients) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 10000; ++i) {
    const double z = normal(rng);
    pairs.emplace_back(z, unit(rng) < logistic(3.0 * z) ? 1.0 : 0.0);
  }
  const ArmFit fit = fit_arm_logistic(pairs);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.b0, 0.0, 0.15);
  EXPECT_NEAR(fit.b1, 3.0, 0.15);
  expect_error([] { fit_arm_logistic({{0.0, 1.0}}); }, ErrorCode::InsufficientArmData);
}

TEST(UpperBound, PlainPredictionAndSaturation) {
  LearnedPolicy p;
  ArmFit fit;
  fit.b0 = 0.0;
  fit.b1 = 3.0;
  fit.fisher = Matrix::Identity(2, 2);
  p.arms = {fit, fit};
  p.m = 0.0;
  EXPECT_DOUBLE_EQ(upper_bound(p, 0.4, 0), logistic(1.2));
  p.m = 1.0;
  EXPECT_NEAR(upper_bound(p, 0.0, 0), 0.731058578630005, 1e-15);
  p.m = 1e3;
  EXPECT_GT(upper_bound(p, 0.2, 1), 1.0 - 1e-12);
}

TEST(PolicyProbs, RandomisedAndNormalisedCases) {
  LearnedPolicy uniform = fixed_policy({0.2, 0.5, 0.9, 0.4}, 0.0, 4);
  const Vector u = policy_probs(uniform, Vector::Zero(4));
  EXPECT_TRUE((u.array() == 0.25).all());
  const Vector p = policy_probs(fixed_policy({0.2, 0.8}, 1.0, 2), Vector::Zero(2));
  EXPECT_NEAR(p(0), 0.2, 1e-15);
  EXPECT_NEAR(p(1), 0.8, 1e-15);
  const Vector sharp = policy_probs(fixed_policy({0.3, 0.35, 0.31}, 1e6, 3), Vector::Zero(3));
  EXPECT_GE(sharp(1), 1.0 - 1e-9);
  const Vector top2 = policy_probs(fixed_policy({0.3, 0.6, 0.5, 0.1}, 1.0, 2), Vector::Zero(4));
  EXPECT_EQ(top2(0), 0.0);
  EXPECT_EQ(top2(3), 0.0);
  EXPECT_NEAR(top2(1), 0.6 / 1.1, 1e-15);
  const Vector tie = policy_probs(fixed_policy({0.5, 0.5, 0.5}, 1.0, 1), Vector::Zero(3));
  EXPECT_EQ(tie(0), 1.0);
}

TEST(Recipes, TableValues) {
  const PolicyRecipe b = baseline_recipe();
  EXPECT_EQ(b.train_n, 256u);
  EXPECT_EQ(b.m, 1.0);
  EXPECT_EQ(b.s, 2.0);
  EXPECT_EQ(b.k_prime, 3);
  const PolicyRecipe n = new_recipe();
  EXPECT_EQ(n.train_n, 1024u);
  EXPECT_EQ(n.m, 1.0);
  EXPECT_EQ(n.s, 1.0);
  EXPECT_EQ(n.k_prime, 1);
}

TEST(Recipes, MissingArmIsReported) {
  BanditEnvironment env;
  env.arms = 3;
  auto log = generate_log(env, 60, 3);
  for (RoundLog& r : log) {
    if (r.arm == 2) r.arm = 1;
  }
  expect_error([&] { learn_policy(log, 3, 1.0, 1.0, 1); }, ErrorCode::InsufficientArmData, "3");
}

TEST(OraclePolicy, PicksBestArmAndBreaksTiesLow) {
  BanditEnvironment env;
  const Vector z = vec({0.1, -0.3, 0.7, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  const Vector a = action_probs(OraclePolicy{env}, z);
  EXPECT_EQ(a(2), 1.0);
  EXPECT_EQ(a.sum(), 1.0);
  env.beta1 = 0.0;
  EXPECT_EQ(action_probs(OraclePolicy{env}, z)(0), 1.0);
}

TEST(MonteCarlo, UniformPolicyWithFlatRewards) {
  BanditEnvironment env;
  env.beta1 = 0.0;
  const McEstimate mc = mc_true_value(UniformPolicy{10}, env, 20000, 3);
  EXPECT_NEAR(mc.value, 0.5, 2.0 / std::sqrt(20000.0));
  EXPECT_EQ(mc.samples, 20000u);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResult) {
  const BanditEnvironment env;
  const McEstimate a = mc_true_value(OraclePolicy{env}, env, 150000, 8, 1);
  const McEstimate b = mc_true_value(OraclePolicy{env}, env, 150000, 8, 3);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(LoggedData, WeightsFollowPolicies) {
  const BanditEnvironment env;
  const auto log = generate_log(env, 300, 4);
  const LoggedDataset uni = build_logged_dataset(log, {UniformPolicy{10}}, env);
  EXPECT_TRUE((uni.weights().array() == 1.0).all());
  const LoggedDataset det = build_logged_dataset(log, {OraclePolicy{env}}, env);
  EXPECT_TRUE((det.weights().array() == 0.0 || det.weights().array() == 10.0).all());
  const LearnedPolicy learned = train_policy(env, baseline_recipe(), 9);
  const LoggedDataset both = build_logged_dataset(log, {learned, OraclePolicy{env}}, env);
  EXPECT_GE(both.weights().minCoeff(), 0.0);
  EXPECT_LE(both.weights().maxCoeff(), 10.0);
  EXPECT_EQ(both.support().upper(1), 10.0);
  const Matrix probs = logged_target_probs(log, {learned});
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_NEAR(both.weights()(static_cast<Eigen::Index>(i), 0), probs(static_cast<Eigen::Index>(i), 0) * 10.0,
                1e-12);
  }
}
