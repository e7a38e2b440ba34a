#ifndef ELBANDIT_EXPERIMENTS_HPP
#define ELBANDIT_EXPERIMENTS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "elbandit/bandit.hpp"
#include "elbandit/intervals.hpp"
#include "elbandit/posterior.hpp"

namespace elbandit {

enum class IntervalKind { Hpd, Wilks };
const char* to_string(IntervalKind kind);

/// Resolves "baseline", "new" or "custom:m,s,kprime" (custom uses train_n).
PolicyRecipe recipe_by_name(const std::string& name, std::size_t train_n = 256);

std::vector<std::size_t> default_size_ladder();

struct CoverageConfig {
  std::vector<std::string> policies{"baseline", "new"};
  std::vector<std::size_t> sizes = default_size_ladder();
  std::vector<double> levels{0.90, 0.95};
  std::size_t replicates = 10000;
  std::uint64_t seed = 20240601;
  std::size_t grid_points = 10000;
  double quantile = 0.9999;
  std::size_t mc_samples = 1000000;
  int threads = 1;
  BanditEnvironment env;
  /// Retrain the target policy for every replicate instead of once per study.
  bool redraw_policy = false;
};

CoverageConfig coverage_preset(const std::string& name);

struct CoverageRecord {
  std::string policy;
  std::size_t n = 0;
  std::size_t replicate = 0;
  bool failed = false;
  std::string failure;
  double true_value = 0.0;
  std::vector<Interval> hpd;    // one per level
  std::vector<Interval> wilks;  // one per level
  Interval sub_support;
};

struct CoverageCell {
  std::string policy;
  IntervalKind kind = IntervalKind::Hpd;
  double level = 0.95;
  std::size_t n = 0;
  std::size_t replicates = 0;
  double coverage = 0.0;
  double mc_error = 0.0;
  double mean_width = 0.0;
  std::array<double, 5> width_quantiles{};  // 5, 25, 50, 75, 95 %
};

struct PolicyTruth {
  std::string policy;
  double value = 0.0;
  double std_error = 0.0;
};

struct CoverageReport {
  std::vector<PolicyTruth> truths;
  std::vector<CoverageCell> cells;
  std::vector<CoverageRecord> records;
  std::vector<double> wilks_relative_threshold;  // one per level
  std::size_t attempted = 0;
  std::size_t failures = 0;

  const CoverageCell* find(const std::string& policy, IntervalKind kind, double level, std::size_t n) const;
};

/// Coverage and width of HPD and Wilks intervals. Throws SolverFailure when
/// 0.1% or more of the replicates fail.
CoverageReport coverage_run(const CoverageConfig& config);

enum class ComparisonMode { Absolute, Relative, Diff };
const char* to_string(ComparisonMode mode);

struct ComparisonConfig {
  std::vector<std::size_t> sizes{400};
  std::vector<double> margins{0.0, 0.05, 0.10};
  std::vector<ComparisonMode> modes{ComparisonMode::Absolute, ComparisonMode::Relative, ComparisonMode::Diff};
  std::size_t replicates = 500;
  std::uint64_t seed = 20240601;
  std::size_t grid_points_2d = 1000;
  std::size_t grid_points_1d = 10000;
  double quantile = 0.9999;
  int threads = 1;
  BanditEnvironment env;
  std::string baseline = "baseline";
  std::string candidate = "new";
};

ComparisonConfig comparison_preset(const std::string& name);

struct ComparisonRecord {
  std::size_t n = 0;
  std::size_t replicate = 0;
  bool failed = false;
  std::string failure;
  std::vector<double> absolute;  // one per margin
  std::vector<double> relative;
  std::vector<double> diff;
};

struct ComparisonCell {
  double margin = 0.0;
  ComparisonMode mode = ComparisonMode::Absolute;
  std::size_t n = 0;
  std::size_t replicates = 0;
  double mean = 0.0;
  double band_lo = 0.0;  // 2.5 %
  double band_hi = 0.0;  // 97.5 %
};

struct ComparisonReport {
  std::vector<PolicyTruth> truths;
  std::vector<ComparisonCell> cells;
  std::vector<ComparisonRecord> records;
  std::vector<double> margins;
  std::size_t attempted = 0;
  std::size_t failures = 0;

  const ComparisonCell* find(double margin, ComparisonMode mode, std::size_t n) const;
  /// Mean over replicates of |P(d > delta) - P(v_2 > v_1 + delta)|.
  double mean_diff_gap(double margin, std::size_t n) const;
};

ComparisonReport comparison_run(const ComparisonConfig& config, std::size_t mc_samples = 0);

/// Linear-interpolation sample quantile of unsorted data.
double sample_quantile(std::vector<double> data, double q);

}  // namespace elbandit

#endif  // ELBANDIT_EXPERIMENTS_HPP
