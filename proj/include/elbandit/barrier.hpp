#ifndef ELBANDIT_BARRIER_HPP
#define ELBANDIT_BARRIER_HPP

#include <algorithm>
#include <cmath>
#include <limits>

#include "elbandit/types.hpp"

namespace elbandit {

/// Affine functions offsets + rows * x, one per row.
struct AffineRows {
  Matrix rows;
  Vector offsets;

  Eigen::Index size() const { return rows.rows(); }

  Vector evaluate(const Vector& x) const { return offsets + rows * x; }
};

struct BarrierSettings {
  double mu_start = 1.0;
  double mu_warm_start = 1e-8;
  /// Warm starts are pulled toward the reference point until every slack is
  /// at least this fraction of the reference margin.
  double warm_margin = 1e-2;
  double mu_final = 1e-11;
  double mu_factor = 1e-2;
  double stage_tolerance = 1e-7;
  double final_tolerance = 1e-12;
  int max_stage_iterations = 100;
  int max_total_iterations = 400;
  double divergence_norm = 1e10;
  double divergence_value = 1e12;
  // A solve that stalls beyond this norm is treated as unbounded: roundoff
  // in 1 + a.x stops the line search long before divergence_norm is hit.
  double stall_divergence_norm = 1e6;
};

struct BarrierResult {
  Vector x;
  double value = 0.0;  // smooth objective at x, barrier excluded
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

namespace detail {

inline double min_value(const AffineRows& rows, const Vector& x) {
  if (rows.size() == 0) return std::numeric_limits<double>::infinity();
  return rows.evaluate(x).minCoeff();
}

// Largest step in (0, 1] keeping every row strictly positive.
inline double fraction_to_boundary(const AffineRows& rows, const Vector& x, const Vector& dir,
                                   double fraction) {
  double step = 1.0;
  if (rows.size() == 0) return step;
  const Vector val = rows.evaluate(x);
  const Vector slope = rows.rows * dir;
  for (Eigen::Index k = 0; k < val.size(); ++k) {
    if (slope(k) < 0.0) step = std::min(step, fraction * val(k) / -slope(k));
  }
  return step;
}

}  // namespace detail

/// Maximizes problem.evaluate(x) + mu * sum_k log(barrier_k(x)) for a
/// decreasing sequence of mu, keeping domain rows and barrier rows strictly
/// positive throughout.
///
/// Problem must provide
///   Eigen::Index dim() const;
///   const AffineRows& domain() const;    // strictly positive where evaluate is defined
///   const AffineRows& barrier() const;   // the inequality constraints
///   Vector reference_point() const;      // strictly feasible for both sets
///   double evaluate(const Vector& x, Vector* grad, Matrix* hess) const;
template <class Problem>
BarrierResult maximize_with_barrier(const Problem& problem, const Vector* warm,
                                    const BarrierSettings& settings) {
  const AffineRows& domain = problem.domain();
  const AffineRows& barrier = problem.barrier();
  const Eigen::Index p = problem.dim();

  BarrierResult result;
  Vector x = problem.reference_point();
  bool warm_used = false;
  if (warm != nullptr && warm->size() == p) {
    const Vector ref = x;
    const double ref_margin =
        std::min(detail::min_value(domain, ref), detail::min_value(barrier, ref));
    double theta = 1.0;
    for (int k = 0; k < 60; ++k) {
      const Vector trial = ref + theta * (*warm - ref);
      const double m = std::min(detail::min_value(domain, trial), detail::min_value(barrier, trial));
      if (m >= settings.warm_margin * ref_margin) {
        x = trial;
        warm_used = true;
        break;
      }
      theta *= 0.5;
    }
  }

  auto barrier_objective = [&](const Vector& at, double mu, Vector* grad, Matrix* hess) {
    double f = problem.evaluate(at, grad, hess);
    if (barrier.size() > 0) {
      const Vector h = barrier.evaluate(at);
      f += mu * h.array().log().sum();
      if (grad != nullptr) *grad += mu * (barrier.rows.transpose() * h.cwiseInverse());
      if (hess != nullptr) {
        const Vector scale = h.array().square().inverse().matrix() * mu;
        hess->noalias() -= barrier.rows.transpose() * scale.asDiagonal() * barrier.rows;
      }
    }
    return f;
  };

  double mu = warm_used ? std::max(settings.mu_final, settings.mu_warm_start) : settings.mu_start;
  Vector grad(p);
  Matrix hess(p, p);
  int total = 0;
  bool last_stage = false;
  while (true) {
    last_stage = mu <= settings.mu_final * (1.0 + 1e-12);
    const double tol_base = last_stage ? settings.final_tolerance : settings.stage_tolerance;
    bool stage_done = false;
    for (int it = 0; it < settings.max_stage_iterations; ++it) {
      const double f = barrier_objective(x, mu, &grad, &hess);
      const double tol = tol_base * std::max(1.0, std::abs(f));
      if (!std::isfinite(f)) break;
      Matrix neg_h = -hess;
      Vector dir;
      Eigen::LDLT<Matrix> ldlt(neg_h);
      bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                (ldlt.vectorD().array() > 0.0).all();
      if (ok) {
        dir = ldlt.solve(grad);
        ok = dir.allFinite();
      }
      if (!ok) {
        const double ridge = 1e-10 * (1.0 + neg_h.diagonal().cwiseAbs().maxCoeff());
        neg_h.diagonal().array() += ridge;
        Eigen::LDLT<Matrix> ridged(neg_h);
        dir = ridged.solve(grad);
        if (ridged.info() != Eigen::Success || !dir.allFinite() || grad.dot(dir) <= 0.0) dir = grad;
      }
      const double decrement = grad.dot(dir);
      if (decrement * 0.5 < tol) {
        stage_done = true;
        break;
      }
      double step = std::min(detail::fraction_to_boundary(domain, x, dir, 0.99),
                             detail::fraction_to_boundary(barrier, x, dir, 0.99));
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vector trial = x + step * dir;
        if (detail::min_value(domain, trial) > 0.0 && detail::min_value(barrier, trial) > 0.0) {
          const double ft = barrier_objective(trial, mu, nullptr, nullptr);
          if (std::isfinite(ft) && ft >= f + 1e-4 * step * decrement) {
            x = trial;
            accepted = true;
            break;
          }
        }
        step *= 0.5;
      }
      ++total;
      if (!accepted) {
        // No representable ascent left: accept as converged when the
        // decrement is at rounding level.
        stage_done = decrement * 0.5 < 1e-8 * std::max(1.0, std::abs(f));
        break;
      }
      if (x.norm() > settings.divergence_norm ||
          problem.evaluate(x, nullptr, nullptr) > settings.divergence_value) {
        result.x = x;
        result.value = problem.evaluate(x, nullptr, nullptr);
        result.iterations = total;
        result.diverged = true;
        return result;
      }
      if (total >= settings.max_total_iterations) break;
    }
    if (last_stage || total >= settings.max_total_iterations) {
      result.converged = stage_done && last_stage;
      break;
    }
    mu = std::max(settings.mu_final, mu * settings.mu_factor);
  }
  result.x = x;
  result.iterations = total;
  result.diverged = !result.converged && x.norm() > settings.stall_divergence_norm;
  result.value = problem.evaluate(x, nullptr, nullptr);
  return result;
}

}  // namespace elbandit

#endif  // ELBANDIT_BARRIER_HPP
