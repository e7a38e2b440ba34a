#ifndef ELBANDIT_TYPES_HPP
#define ELBANDIT_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace elbandit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  InvalidArgument,
  RewardOutOfRange,
  WeightOutsideSupport,
  TooFewSamples,
  DimensionMismatch,
  NonPositiveLogArgument,
  MaxIterationsExceeded,
  WrongPolicyCount,
  InconsistentBoundaryAllocation,
  InfeasibleSupport,
  ZeroWeightSum,
  SolverFailure,
  AllCellsInfeasible,
  EmptyConditioningEvent,
  UnsupportedDf,
  InsufficientArmData,
  ParseError,
  ConfigMismatch,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when an iterative solve hits its cap. Carries the best objective
/// seen so callers can decide whether to accept it.
class MaxIterationsError : public Error {
 public:
  MaxIterationsError(const std::string& what, double best_value)
      : Error(ErrorCode::MaxIterationsExceeded, what), best_value_(best_value) {}

  double best_value() const noexcept { return best_value_; }
  bool converged() const noexcept { return false; }

 private:
  double best_value_;
};

/// Log-empirical likelihood with the additive constant dropped. Only
/// differences between values computed on the same dataset are meaningful.
class LogLik {
 public:
  constexpr LogLik() = default;
  constexpr explicit LogLik(double value) : value_(value) {}

  static constexpr LogLik neg_infinity() {
    return LogLik(-std::numeric_limits<double>::infinity());
  }

  constexpr double value() const { return value_; }
  bool is_neg_infinity() const { return std::isinf(value_) && value_ < 0; }
  bool finite() const { return std::isfinite(value_); }

  /// Log ratio relative to a maximum; never positive.
  double ratio_to(const LogLik& max) const {
    if (is_neg_infinity()) return -std::numeric_limits<double>::infinity();
    return std::min(0.0, value_ - max.value_);
  }

 private:
  double value_ = 0.0;
};

/// Per-policy weight bounds; the reward range is always [0, 1].
class BoxSupport {
 public:
  BoxSupport() = default;
  explicit BoxSupport(std::vector<std::pair<double, double>> bounds);

  std::size_t policy_count() const { return bounds_.size(); }
  double lower(std::size_t j) const { return bounds_[j].first; }
  double upper(std::size_t j) const { return bounds_[j].second; }
  bool collapsed(std::size_t j) const { return bounds_[j].first == bounds_[j].second; }
  const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }

  /// True when every weight box contains 1, so E[w] = 1 is attainable.
  bool admits_unit_mean() const;

  bool operator==(const BoxSupport&) const = default;

 private:
  std::vector<std::pair<double, double>> bounds_;
};

/// One corner of the support: weight vector and reward in {0, 1}.
struct SupportVertex {
  Vector weights;
  double reward = 0.0;
};

/// Logged importance weights (n x l) and rewards with their declared support.
/// Immutable after construction.
class LoggedDataset {
 public:
  LoggedDataset(Matrix weights, Vector rewards, BoxSupport support);

  std::size_t size() const { return static_cast<std::size_t>(rewards_.size()); }
  std::size_t policy_count() const { return support_.policy_count(); }
  const Matrix& weights() const { return weights_; }
  const Vector& rewards() const { return rewards_; }
  const BoxSupport& support() const { return support_; }

  /// Dataset restricted to a subset of policy columns.
  LoggedDataset select_policies(const std::vector<std::size_t>& columns) const;

 private:
  Matrix weights_;
  Vector rewards_;
  BoxSupport support_;
};

}  // namespace elbandit

#endif  // ELBANDIT_TYPES_HPP
