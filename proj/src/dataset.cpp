#include "elbandit/dataset.hpp"

#include <sstream>

namespace elbandit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RewardOutOfRange: return "RewardOutOfRange";
    case ErrorCode::WeightOutsideSupport: return "WeightOutsideSupport";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveLogArgument: return "NonPositiveLogArgument";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::WrongPolicyCount: return "WrongPolicyCount";
    case ErrorCode::InconsistentBoundaryAllocation: return "InconsistentBoundaryAllocation";
    case ErrorCode::InfeasibleSupport: return "InfeasibleSupport";
    case ErrorCode::ZeroWeightSum: return "ZeroWeightSum";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::AllCellsInfeasible: return "AllCellsInfeasible";
    case ErrorCode::EmptyConditioningEvent: return "EmptyConditioningEvent";
    case ErrorCode::UnsupportedDf: return "UnsupportedDf";
    case ErrorCode::InsufficientArmData: return "InsufficientArmData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

BoxSupport::BoxSupport(std::vector<std::pair<double, double>> bounds)
    : bounds_(std::move(bounds)) {
  if (bounds_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "support needs at least one policy");
  }
  for (std::size_t j = 0; j < bounds_.size(); ++j) {
    const auto [lo, hi] = bounds_[j];
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || lo > hi) {
      std::ostringstream msg;
      msg << "invalid weight bounds for policy " << j + 1 << ": [" << lo << ", " << hi << "]";
      throw Error(ErrorCode::InvalidArgument, msg.str());
    }
  }
}

bool BoxSupport::admits_unit_mean() const {
  for (const auto& [lo, hi] : bounds_) {
    if (lo > 1.0 || hi < 1.0) return false;
  }
  return true;
}

LoggedDataset::LoggedDataset(Matrix weights, Vector rewards, BoxSupport support)
    : weights_(std::move(weights)), rewards_(std::move(rewards)), support_(std::move(support)) {}

LoggedDataset LoggedDataset::select_policies(const std::vector<std::size_t>& columns) const {
  Matrix w(weights_.rows(), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::pair<double, double>> bounds;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] >= policy_count()) {
      throw Error(ErrorCode::DimensionMismatch, "policy column out of range");
    }
    w.col(static_cast<Eigen::Index>(k)) = weights_.col(static_cast<Eigen::Index>(columns[k]));
    bounds.push_back(support_.bounds()[columns[k]]);
  }
  return LoggedDataset(std::move(w), rewards_, BoxSupport(std::move(bounds)));
}

LoggedDataset build_dataset(const Matrix& weight_rows, const Vector& rewards,
                            const BoxSupport& support) {
  const auto n = weight_rows.rows();
  if (rewards.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "weight rows and rewards differ in length");
  }
  if (static_cast<std::size_t>(weight_rows.cols()) != support.policy_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "weight columns do not match the number of support bounds");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = rewards(i);
    if (!(r >= 0.0 && r <= 1.0)) {
      std::ostringstream msg;
      msg << "reward outside [0,1] at row " << i + 1 << ": " << r;
      throw Error(ErrorCode::RewardOutOfRange, msg.str());
    }
    for (Eigen::Index j = 0; j < weight_rows.cols(); ++j) {
      const double w = weight_rows(i, j);
      const auto ju = static_cast<std::size_t>(j);
      if (!(w >= support.lower(ju) && w <= support.upper(ju))) {
        std::ostringstream msg;
        msg << "weight outside support at row " << i + 1 << ", column " << j + 1 << ": " << w
            << " not in [" << support.lower(ju) << ", " << support.upper(ju) << "]";
        throw Error(ErrorCode::WeightOutsideSupport, msg.str());
      }
    }
  }
  if (n < 2) {
    throw Error(ErrorCode::TooFewSamples, "dataset needs at least 2 observations");
  }
  return LoggedDataset(weight_rows, rewards, support);
}

LoggedSample sample_at(const LoggedDataset& ds, std::size_t i) {
  const auto row = static_cast<Eigen::Index>(i);
  return {ds.rewards()(row), ds.weights().row(row).transpose()};
}

std::vector<Vector> weight_vertices(const BoxSupport& support) {
  const std::size_t l = support.policy_count();
  std::vector<Vector> out{Vector::Zero(static_cast<Eigen::Index>(l))};
  for (std::size_t j = 0; j < l; ++j) {
    std::vector<Vector> next;
    for (const Vector& prefix : out) {
      Vector lo = prefix;
      lo(static_cast<Eigen::Index>(j)) = support.lower(j);
      next.push_back(lo);
      if (!support.collapsed(j)) {
        Vector hi = prefix;
        hi(static_cast<Eigen::Index>(j)) = support.upper(j);
        next.push_back(hi);
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<SupportVertex> support_vertices(const BoxSupport& support) {
  std::vector<SupportVertex> out;
  for (const Vector& w : weight_vertices(support)) {
    out.push_back({w, 0.0});
    out.push_back({w, 1.0});
  }
  return out;
}

Vector is_estimate(const LoggedDataset& ds) {
  const auto n = static_cast<double>(ds.size());
  return (ds.weights().transpose() * ds.rewards()) / n;
}

Vector snis_estimate(const LoggedDataset& ds) {
  const Vector num = ds.weights().transpose() * ds.rewards();
  const Vector den = ds.weights().colwise().sum().transpose();
  Vector out(num.size());
  for (Eigen::Index j = 0; j < num.size(); ++j) {
    if (!(den(j) > 0.0)) {
      throw Error(ErrorCode::ZeroWeightSum,
                  "self-normalized estimate undefined: weights of policy " +
                      std::to_string(j + 1) + " sum to zero");
    }
    out(j) = num(j) / den(j);
  }
  return out;
}

}  // namespace elbandit
