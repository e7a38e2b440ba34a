#ifndef ELBANDIT_BANDIT_HPP
#define ELBANDIT_BANDIT_HPP

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "elbandit/types.hpp"

namespace elbandit {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for substream `stream`, item `index`, of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

namespace streams {
inline constexpr std::uint64_t kContext = 1;
inline constexpr std::uint64_t kBehavior = 2;
inline constexpr std::uint64_t kRewards = 3;
inline constexpr std::uint64_t kTraining = 4;
inline constexpr std::uint64_t kEvaluation = 5;
inline constexpr std::uint64_t kMonteCarlo = 6;
inline constexpr std::uint64_t kReplicate = 7;
}  // namespace streams

/// Independent generators for the consumers of one simulated log.
struct RngStreams {
  explicit RngStreams(std::uint64_t seed);

  Rng context;
  Rng behavior;
  Rng rewards;
};

struct BanditEnvironment {
  int arms = 10;
  int context_dim = 12;
  double beta0 = 0.0;
  double beta1 = 3.0;

  void validate() const;
};

struct ContextDraw {
  Vector shared;     // x_c, on the simplex
  Matrix arm_features;  // K x d
  Vector z;          // z_a = x_c . x_a
};

ContextDraw sample_context(const BanditEnvironment& env, Rng& rng);

double logistic(double x);
/// log(logistic(x)) without overflow.
double log_logistic(double x);

Vector true_arm_probs(const BanditEnvironment& env, const Vector& z);
inline Vector true_arm_probs(const BanditEnvironment& env, const ContextDraw& ctx) {
  return true_arm_probs(env, ctx.z);
}

struct RoundLog {
  Vector z;
  int arm = 0;  // zero-based
  double reward = 0.0;
  double behavior_prob = 0.0;
};

/// Rounds under the uniform behavior policy.
std::vector<RoundLog> generate_log(const BanditEnvironment& env, std::size_t n, RngStreams& rng);
std::vector<RoundLog> generate_log(const BanditEnvironment& env, std::size_t n, std::uint64_t seed);

struct ArmFit {
  double b0 = 0.0;
  double b1 = 0.0;
  Matrix fisher = Matrix::Zero(2, 2);
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  // all covariates identical
};

inline constexpr double kLogisticRidge = 1e-6;

/// Ridge-penalized maximum-likelihood logistic fit of r on (1, z).
ArmFit fit_arm_logistic(const std::vector<std::pair<double, double>>& pairs);

struct LearnedPolicy {
  std::vector<ArmFit> arms;
  double m = 1.0;
  double s = 1.0;
  int k_prime = 1;
};

double upper_bound(const LearnedPolicy& policy, double z, int arm);

/// Softmax of s log ub over the K' largest upper bounds. Sets *degenerate
/// when every surviving bound is zero, in which case the survivors share
/// the mass uniformly.
Vector policy_probs(const LearnedPolicy& policy, const Vector& z, bool* degenerate = nullptr);

LearnedPolicy learn_policy(const std::vector<RoundLog>& log, int arms, double m, double s, int k_prime);

struct OraclePolicy {
  BanditEnvironment env;
};

struct UniformPolicy {
  int arms = 10;
};

using Policy = std::variant<LearnedPolicy, OraclePolicy, UniformPolicy>;

Vector action_probs(const Policy& policy, const Vector& z);

struct PolicyRecipe {
  std::string name;
  std::size_t train_n = 256;
  double m = 1.0;
  double s = 2.0;
  int k_prime = 3;
};

PolicyRecipe baseline_recipe();
PolicyRecipe new_recipe();

/// Trains a recipe on a fresh uniform-behavior log drawn from `seed`.
LearnedPolicy train_policy(const BanditEnvironment& env, const PolicyRecipe& recipe, std::uint64_t seed);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Expected reward over fresh contexts, exact over the arm choice. Work is
/// split into fixed chunks with their own substreams, so the result does
/// not depend on `threads`.
McEstimate mc_true_value(const Policy& policy, const BanditEnvironment& env, std::size_t samples,
                         std::uint64_t seed, int threads = 1);

/// Importance weights pi_j(a|x) / p(a|x) per policy with bounds [0, K].
LoggedDataset build_logged_dataset(const std::vector<RoundLog>& log, const std::vector<Policy>& policies,
                                   const BanditEnvironment& env);

/// Target probabilities of the logged arm per policy, n x l.
Matrix logged_target_probs(const std::vector<RoundLog>& log, const std::vector<Policy>& policies);

}  // namespace elbandit

#endif  // ELBANDIT_BANDIT_HPP
