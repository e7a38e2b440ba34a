#ifndef ELBANDIT_POSTERIOR_HPP
#define ELBANDIT_POSTERIOR_HPP

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "elbandit/el.hpp"
#include "elbandit/intervals.hpp"

namespace elbandit {

enum class Mode { Value, Diff };

const char* to_string(Mode mode);

/// Hyperrectangle {v : L(v) >= L* / c} projected onto each axis.
struct SubSupport {
  Mode mode = Mode::Value;
  std::vector<Interval> bounds;
  double threshold_log_c = 0.0;
  double phi = 0.0;  // max_loglik - log c
  int df = 1;

  std::size_t dims() const { return bounds.size(); }
  bool contains(const Vector& point) const;
};

/// One endpoint pair of the adaptive sub-support along `direction`, where
/// the constrained quantity is direction . (w r). Natural range limits are
/// applied afterwards.
Interval sub_support_dual(const ElEvaluator& ev, const Vector& direction, double log_c,
                          const Interval& natural_range);

/// Value-mode bounds for policy j, clipped to [0, 1].
Interval sub_support_dual(const ElEvaluator& ev, std::size_t j, double log_c);

/// Difference-mode bounds for v_2 - v_1, clipped to [-1, 1].
Interval sub_support_dual_diff(const ElEvaluator& ev, double log_c);

/// Degrees of freedom used to calibrate c.
int sub_support_df(std::size_t policy_count, Mode mode);

SubSupport sub_support(const ElEvaluator& ev, Mode mode, double quantile = 0.9999);

class PriorSpec {
 public:
  enum class Kind { Flat, BetaProduct, Tabulated };

  static PriorSpec flat();
  /// One (a, b) pair per dimension, or a single pair broadcast to all.
  static PriorSpec beta_product(std::vector<std::pair<double, double>> params);
  /// Per-dimension tabulated densities, linearly interpolated and zero
  /// outside their grids. A single table is broadcast to all dimensions.
  static PriorSpec tabulated(std::vector<Vector> grids, std::vector<Vector> values);

  Kind kind() const { return kind_; }
  const std::vector<std::pair<double, double>>& beta_params() const { return beta_; }
  const std::vector<Vector>& table_grids() const { return grids_; }
  const std::vector<Vector>& table_values() const { return values_; }

  /// Log prior density at a point. Difference-mode coordinates in [-1, 1]
  /// are mapped to [0, 1] before a Beta density is applied.
  double log_density(const Vector& point, Mode mode) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::Flat;
  std::vector<std::pair<double, double>> beta_;
  std::vector<Vector> grids_;
  std::vector<Vector> values_;
};

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 1;

  double width() const { return (hi - lo) / static_cast<double>(points); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
};

struct PosteriorDiagnostics {
  std::size_t infeasible_cells = 0;
  std::size_t nonconverged_cells = 0;
  std::size_t newton_iterations = 0;
};

/// Posterior on an equispaced grid. Cells are stored with the last axis
/// varying fastest.
class GridPosterior {
 public:
  GridPosterior(Mode mode, std::vector<GridAxis> axes, Vector log_density,
                PosteriorDiagnostics diagnostics = {});

  Mode mode() const { return mode_; }
  std::size_t dims() const { return axes_.size(); }
  const std::vector<GridAxis>& axes() const { return axes_; }
  std::size_t size() const { return static_cast<std::size_t>(log_density_.size()); }

  const Vector& log_density() const { return log_density_; }
  double log_norm() const { return log_norm_; }
  const Vector& cell_mass() const { return cell_mass_; }
  const PosteriorDiagnostics& diagnostics() const { return diagnostics_; }

  /// Center of a cell in parameter space.
  Vector center(std::size_t cell) const;
  /// Cell with the largest mass (lowest index on ties).
  std::size_t argmax() const;
  /// Marginal cell masses along one axis.
  Vector marginal(std::size_t axis) const;

 private:
  Mode mode_;
  std::vector<GridAxis> axes_;
  Vector log_density_;
  double log_norm_ = 0.0;
  Vector cell_mass_;
  PosteriorDiagnostics diagnostics_;
};

struct PosteriorSettings {
  std::size_t grid_points = 0;  // per axis; 0 selects 10^4 (1-D) or 10^3 (2-D)
  double quantile = 0.9999;
  int threads = 1;
  std::size_t strip_length = 500;
};

std::size_t default_grid_points(std::size_t dims);

/// Grid posterior over the adaptive sub-support. Value mode supports one or
/// two policies; Diff mode needs exactly two.
GridPosterior build_posterior(const ElEvaluator& ev, Mode mode, const PriorSpec& prior,
                              const PosteriorSettings& settings = {});
GridPosterior build_posterior(const ElEvaluator& ev, Mode mode, const PriorSpec& prior,
                              const SubSupport& region, const PosteriorSettings& settings);

/// Highest-posterior-density interval of a 1-D posterior.
Interval hpd_interval(const GridPosterior& post, double alpha);

struct Absolute {
  double delta = 0.0;
};
struct Relative {
  double delta = 0.0;
};
struct HalfPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};
struct Rectangle {
  Interval first;
  Interval second;
};

/// Predicates on (v_1, v_2): Absolute v_2 > v_1 + delta, Relative
/// v_2 > (1 + delta) v_1, HalfPlane a v_1 + b v_2 > c, Rectangle closed box.
using Event = std::variant<Absolute, Relative, HalfPlane, Rectangle>;

struct Conditional {
  Event event;
  Event given;
};

using Query = std::variant<Absolute, Relative, HalfPlane, Rectangle, Conditional>;

bool satisfies(const Event& event, double v1, double v2);

double prob_region(const GridPosterior& post, const Query& query);

/// P(d > delta) on a difference-mode posterior.
double prob_diff(const GridPosterior& post, double delta);

}  // namespace elbandit

#endif  // ELBANDIT_POSTERIOR_HPP
