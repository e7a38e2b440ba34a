#include "elbandit/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "elbandit/dataset.hpp"
#include "elbandit/parallel.hpp"

namespace elbandit {

namespace {

constexpr std::size_t kMcChunk = 1 << 16;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double penalized_loglik(const std::vector<std::pair<double, double>>& pairs, double b0, double b1) {
  double out = 0.0;
  for (const auto& [z, r] : pairs) {
    const double eta = b0 + b1 * z;
    out += r * eta - softplus(eta);
  }
  return out - 0.5 * kLogisticRidge * (b0 * b0 + b1 * b1);
}

// Pseudo-inverse of a symmetric positive semidefinite 2x2 matrix.
Eigen::Matrix2d pinv_psd2(const Matrix& m) {
  const double a = m(0, 0);
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double d = m(1, 1);
  const double trace = a + d;
  if (!(trace > 0.0)) return Eigen::Matrix2d::Zero();
  const double det = a * d - b * b;
  Eigen::Matrix2d out;
  if (det > 1e-12 * trace * trace) {
    out << d, -b, -b, a;
    return out / det;
  }
  out << a, b, b, d;
  return out / (trace * trace);
}

double standard_error(const ArmFit& fit, double z) {
  const Eigen::Vector2d x(1.0, z);
  return std::sqrt(std::max(0.0, x.dot(pinv_psd2(fit.fisher) * x)));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  state = out ^ (stream * 0xD1B54A32D192ED03ULL);
  out = splitmix64(state);
  state = out ^ (index * 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(state);
}

RngStreams::RngStreams(std::uint64_t seed)
    : context(derive_seed(seed, streams::kContext)),
      behavior(derive_seed(seed, streams::kBehavior)),
      rewards(derive_seed(seed, streams::kRewards)) {}

void BanditEnvironment::validate() const {
  if (arms < 2) throw Error(ErrorCode::InvalidArgument, "environment needs at least two arms");
  if (context_dim < 1) throw Error(ErrorCode::InvalidArgument, "context dimension must be positive");
  if (!std::isfinite(beta0) || !std::isfinite(beta1)) {
    throw Error(ErrorCode::InvalidArgument, "environment coefficients must be finite");
  }
}

ContextDraw sample_context(const BanditEnvironment& env, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  ContextDraw out;
  out.shared.resize(env.context_dim);
  for (int k = 0; k < env.context_dim; ++k) out.shared(k) = expo(rng);
  out.shared /= out.shared.sum();
  out.arm_features.resize(env.arms, env.context_dim);
  for (int a = 0; a < env.arms; ++a) {
    for (int k = 0; k < env.context_dim; ++k) out.arm_features(a, k) = normal(rng);
  }
  out.z = out.arm_features * out.shared;
  return out;
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_logistic(double x) { return -softplus(-x); }

Vector true_arm_probs(const BanditEnvironment& env, const Vector& z) {
  return z.unaryExpr([&](double za) { return logistic(env.beta0 + env.beta1 * za); });
}

std::vector<RoundLog> generate_log(const BanditEnvironment& env, std::size_t n, RngStreams& rng) {
  env.validate();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "log size must be positive");
  std::uniform_int_distribution<int> arm_dist(0, env.arms - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = 1.0 / env.arms;
  std::vector<RoundLog> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ContextDraw ctx = sample_context(env, rng.context);
    RoundLog round;
    round.arm = arm_dist(rng.behavior);
    const double prob = logistic(env.beta0 + env.beta1 * ctx.z(round.arm));
    round.reward = unit(rng.rewards) < prob ? 1.0 : 0.0;
    round.behavior_prob = p;
    round.z = ctx.z;
    out.push_back(std::move(round));
  }
  return out;
}

std::vector<RoundLog> generate_log(const BanditEnvironment& env, std::size_t n, std::uint64_t seed) {
  RngStreams rng(seed);
  return generate_log(env, n, rng);
}

ArmFit fit_arm_logistic(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw Error(ErrorCode::InsufficientArmData, "logistic fit needs at least two observations");
  ArmFit fit;
  fit.degenerate = std::all_of(pairs.begin(), pairs.end(),
                               [&](const auto& pr) { return pr.first == pairs.front().first; });
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  double current = penalized_loglik(pairs, 0.0, 0.0);
  for (int it = 0; it < 100; ++it) {
    Eigen::Vector2d grad = -kLogisticRidge * b;
    Eigen::Matrix2d info = kLogisticRidge * Eigen::Matrix2d::Identity();
    for (const auto& [z, r] : pairs) {
      const double p = logistic(b(0) + b(1) * z);
      const Eigen::Vector2d x(1.0, z);
      grad += (r - p) * x;
      info += p * (1.0 - p) * x * x.transpose();
    }
    if (grad.norm() < 1e-8) {
      fit.converged = true;
      break;
    }
    const Eigen::Vector2d dir = info.ldlt().solve(grad);
    const double slack = 1e-12 * (1.0 + std::abs(current));
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      const Eigen::Vector2d trial = b + step * dir;
      const double value = penalized_loglik(pairs, trial(0), trial(1));
      if (value >= current - slack) {
        b = trial;
        current = value;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    fit.iterations = it + 1;
    if (!moved) {
      fit.converged = true;
      break;
    }
  }
  fit.b0 = b(0);
  fit.b1 = b(1);
  for (const auto& [z, r] : pairs) {
    const double p = logistic(fit.b0 + fit.b1 * z);
    const Eigen::Vector2d x(1.0, z);
    fit.fisher += p * (1.0 - p) * x * x.transpose();
  }
  return fit;
}

double upper_bound(const LearnedPolicy& policy, double z, int arm) {
  if (arm < 0 || static_cast<std::size_t>(arm) >= policy.arms.size()) {
    throw Error(ErrorCode::InvalidArgument, "arm index out of range");
  }
  const ArmFit& fit = policy.arms[static_cast<std::size_t>(arm)];
  return logistic(fit.b0 + fit.b1 * z + policy.m * standard_error(fit, z));
}

namespace {

double log_upper_bound(const LearnedPolicy& policy, double z, int arm) {
  const ArmFit& fit = policy.arms[static_cast<std::size_t>(arm)];
  return log_logistic(fit.b0 + fit.b1 * z + policy.m * standard_error(fit, z));
}

}  // namespace

Vector policy_probs(const LearnedPolicy& policy, const Vector& z, bool* degenerate) {
  const auto k = static_cast<int>(policy.arms.size());
  if (z.size() != k) throw Error(ErrorCode::DimensionMismatch, "context size differs from arm count");
  if (policy.k_prime < 1 || policy.k_prime > k) {
    throw Error(ErrorCode::InvalidArgument, "K' must lie in 1..K");
  }
  Vector log_ub(k);
  for (int a = 0; a < k; ++a) log_ub(a) = log_upper_bound(policy, z(a), a);
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return log_ub(a) > log_ub(b); });
  order.resize(static_cast<std::size_t>(policy.k_prime));

  Vector out = Vector::Zero(k);
  double top = -std::numeric_limits<double>::infinity();
  for (int a : order) top = std::max(top, policy.s * log_ub(a));
  if (degenerate != nullptr) *degenerate = false;
  if (policy.s == 0.0 || !std::isfinite(top)) {
    if (!std::isfinite(top) && policy.s != 0.0 && degenerate != nullptr) *degenerate = true;
    for (int a : order) out(a) = 1.0 / policy.k_prime;
    return out;
  }
  double total = 0.0;
  for (int a : order) {
    out(a) = std::exp(policy.s * log_ub(a) - top);
    total += out(a);
  }
  return out / total;
}

LearnedPolicy learn_policy(const std::vector<RoundLog>& log, int arms, double m, double s, int k_prime) {
  if (arms < 2) throw Error(ErrorCode::InvalidArgument, "policy needs at least two arms");
  if (k_prime < 1 || k_prime > arms) throw Error(ErrorCode::InvalidArgument, "K' must lie in 1..K");
  if (!(m >= 0.0) || !(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "m and s must be non-negative");
  std::vector<std::vector<std::pair<double, double>>> per_arm(static_cast<std::size_t>(arms));
  for (const RoundLog& round : log) {
    if (round.arm < 0 || round.arm >= arms) throw Error(ErrorCode::InvalidArgument, "logged arm out of range");
    per_arm[static_cast<std::size_t>(round.arm)].emplace_back(round.z(round.arm), round.reward);
  }
  LearnedPolicy out;
  out.m = m;
  out.s = s;
  out.k_prime = k_prime;
  for (int a = 0; a < arms; ++a) {
    if (per_arm[static_cast<std::size_t>(a)].size() < 2) {
      std::ostringstream msg;
      msg << "arm " << a + 1 << " has " << per_arm[static_cast<std::size_t>(a)].size()
          << " logged rounds; at least 2 are needed";
      throw Error(ErrorCode::InsufficientArmData, msg.str());
    }
    out.arms.push_back(fit_arm_logistic(per_arm[static_cast<std::size_t>(a)]));
  }
  return out;
}

Vector action_probs(const Policy& policy, const Vector& z) {
  return std::visit(
      [&](const auto& p) -> Vector {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LearnedPolicy>) {
          return policy_probs(p, z);
        } else if constexpr (std::is_same_v<T, OraclePolicy>) {
          const Vector probs = true_arm_probs(p.env, z);
          Eigen::Index best = 0;
          for (Eigen::Index a = 1; a < probs.size(); ++a) {
            if (probs(a) > probs(best)) best = a;
          }
          return Vector::Unit(z.size(), best);
        } else {
          return Vector::Constant(z.size(), 1.0 / static_cast<double>(z.size()));
        }
      },
      policy);
}

PolicyRecipe baseline_recipe() { return {"baseline", 256, 1.0, 2.0, 3}; }
PolicyRecipe new_recipe() { return {"new", 1024, 1.0, 1.0, 1}; }

LearnedPolicy train_policy(const BanditEnvironment& env, const PolicyRecipe& recipe, std::uint64_t seed) {
  const auto log = generate_log(env, recipe.train_n, seed);
  return learn_policy(log, env.arms, recipe.m, recipe.s, recipe.k_prime);
}

McEstimate mc_true_value(const Policy& policy, const BanditEnvironment& env, std::size_t samples,
                         std::uint64_t seed, int threads) {
  env.validate();
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "Monte Carlo size must be positive");
  const std::size_t chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<double> sums(chunks, 0.0);
  std::vector<double> squares(chunks, 0.0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng rng(derive_seed(seed, streams::kMonteCarlo, c));
    const std::size_t end = std::min(samples, (c + 1) * kMcChunk);
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = c * kMcChunk; i < end; ++i) {
      const ContextDraw ctx = sample_context(env, rng);
      const double value = action_probs(policy, ctx.z).dot(true_arm_probs(env, ctx.z));
      sum += value;
      sq += value * value;
    }
    sums[c] = sum;
    squares[c] = sq;
  });
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    sum += sums[c];
    sq += squares[c];
  }
  const auto n = static_cast<double>(samples);
  McEstimate out;
  out.samples = samples;
  out.value = sum / n;
  const double var = samples > 1 ? std::max(0.0, (sq - n * out.value * out.value) / (n - 1.0)) : 0.0;
  out.std_error = std::sqrt(var / n);
  return out;
}

Matrix logged_target_probs(const std::vector<RoundLog>& log, const std::vector<Policy>& policies) {
  Matrix out(static_cast<Eigen::Index>(log.size()), static_cast<Eigen::Index>(policies.size()));
  for (std::size_t i = 0; i < log.size(); ++i) {
    for (std::size_t j = 0; j < policies.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          action_probs(policies[j], log[i].z)(log[i].arm);
    }
  }
  return out;
}

LoggedDataset build_logged_dataset(const std::vector<RoundLog>& log, const std::vector<Policy>& policies,
                                   const BanditEnvironment& env) {
  if (policies.empty()) throw Error(ErrorCode::InvalidArgument, "at least one target policy is required");
  const auto k = static_cast<double>(env.arms);
  const Matrix probs = logged_target_probs(log, policies);
  Matrix weights(probs.rows(), probs.cols());
  Vector rewards(static_cast<Eigen::Index>(log.size()));
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (!(log[i].behavior_prob > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "behavior probability must be positive");
    }
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      weights(row, j) = std::clamp(probs(row, j) / log[i].behavior_prob, 0.0, k);
    }
    rewards(row) = log[i].reward;
  }
  std::vector<std::pair<double, double>> bounds(policies.size(), {0.0, k});
  return build_dataset(weights, rewards, BoxSupport(bounds));
}

}  // namespace elbandit
