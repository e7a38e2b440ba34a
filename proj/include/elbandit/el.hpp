#ifndef ELBANDIT_EL_HPP
#define ELBANDIT_EL_HPP

#include <exception>
#include <optional>
#include <vector>

#include "elbandit/barrier.hpp"
#include "elbandit/dataset.hpp"
#include "elbandit/types.hpp"

namespace elbandit {

/// Dual variables of the value (tau has l entries) or difference (tau has a
/// single entry, the difference multiplier) problems.
struct DualPoint {
  Vector beta;
  Vector tau;
};

struct DualEvaluation {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// sum_i log(1 + beta.(w_i - 1) + tau.(w_i r_i - v)) with exact derivatives
/// in (beta, tau). Throws NonPositiveLogArgument outside the domain.
DualEvaluation dual_objective(const LoggedDataset& ds, const Vector& v, const DualPoint& point);

/// Vertex feasibility 1 + beta.(w - 1) + tau.(w r - v) >= 0 at every support vertex.
bool dual_feasible(const BoxSupport& support, const Vector& v, const DualPoint& point,
                   double slack = 0.0);

struct MeleResult {
  Vector beta_star;
  Vector data_masses;
  double residual_mass = 0.0;
  std::vector<Vector> boundary_atoms;  // the active weight vertices W0
  Vector boundary_masses;
  Vector value_lo;
  Vector value_hi;
  LogLik max_loglik;
  double dual_value = 0.0;  // attained dual supremum D_mele

  bool unique() const { return (value_hi - value_lo).cwiseAbs().maxCoeff() == 0.0; }
};

struct ElSolution {
  LogLik loglik;
  DualPoint dual;
  int iterations = 0;
  bool converged = true;
};

struct ElSettings {
  BarrierSettings barrier;
  double tol_active = 1e-7;
  double residual_tolerance = 1e-8;
  double unique_tolerance = 1e-9;
  /// When false, non-convergence is reported in ElSolution::converged
  /// instead of raising MaxIterationsError.
  bool throw_on_max_iterations = true;
};

/// Empirical-likelihood evaluator bound to one dataset. Duplicate
/// observations are merged into weighted atoms, and collapsed weight axes
/// have their beta component pinned at zero.
class ElEvaluator {
 public:
  explicit ElEvaluator(const LoggedDataset& ds, ElSettings settings = {});

  const LoggedDataset& dataset() const { return ds_; }
  std::size_t policy_count() const { return ds_.policy_count(); }

  /// Joint log-EL at value vector v.
  ElSolution value(const Vector& v, const DualPoint* warm = nullptr) const;

  /// Log-EL of the difference v_2 - v_1 (two policies only).
  ElSolution difference(double d, const DualPoint* warm = nullptr) const;

  /// Profile log-EL constraining only the value of policy j.
  ElSolution profile(std::size_t j, double vj, const DualPoint* warm = nullptr) const;

  const MeleResult& mele() const;

  const ElSettings& settings() const { return settings_; }

  /// Unique (w, r) observations with multiplicities.
  const Matrix& atom_weights() const { return atoms_.weights; }
  const Vector& atom_rewards() const { return atoms_.rewards; }
  const Vector& atom_counts() const { return atoms_.counts; }
  /// Weight axes whose bounds are not collapsed to a point.
  const std::vector<Eigen::Index>& free_axes() const { return free_axes_; }

 private:
  struct Atoms {
    Matrix weights;  // unique (w, r) rows
    Vector rewards;
    Vector counts;
  };

  // Solves the dual with moment rows m(w, r) - target for the atoms and
  // the support vertices.
  ElSolution solve_moment(const Matrix& atom_moments, const Matrix& vertex_moments,
                          const Vector& target, const DualPoint* warm) const;
  MeleResult compute_mele() const;

  LoggedDataset ds_;
  ElSettings settings_;
  Atoms atoms_;
  Matrix atom_centered_;     // w - 1 on free axes, per atom
  Matrix atom_value_;        // w * r, per atom
  Matrix vertex_centered_;   // w - 1 on free axes, per support vertex
  Matrix vertex_value_;      // w * r, per support vertex
  std::vector<Eigen::Index> free_axes_;
  bool feasible_support_ = true;
  std::optional<MeleResult> mele_;
  std::exception_ptr mele_error_;
};

LogLik log_el_value(const LoggedDataset& ds, const Vector& v);
LogLik log_el_diff(const LoggedDataset& ds, double d);
MeleResult mele(const LoggedDataset& ds);

/// Difference direction t = (-1, 1).
inline Vector difference_direction() { return (Vector(2) << -1.0, 1.0).finished(); }

}  // namespace elbandit

#endif  // ELBANDIT_EL_HPP
