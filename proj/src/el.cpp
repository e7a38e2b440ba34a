#include "elbandit/el.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace elbandit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// sum_k c_k log(1 + a_k . x) with vertex rows as barrier constraints.
class LogSumProblem {
 public:
  LogSumProblem(Matrix atom_rows, Vector counts, Matrix vertex_rows)
      : counts_(std::move(counts)) {
    domain_.offsets = Vector::Ones(atom_rows.rows());
    domain_.rows = std::move(atom_rows);
    barrier_.offsets = Vector::Ones(vertex_rows.rows());
    barrier_.rows = std::move(vertex_rows);
  }

  Eigen::Index dim() const { return domain_.rows.cols(); }
  const AffineRows& domain() const { return domain_; }
  const AffineRows& barrier() const { return barrier_; }
  Vector reference_point() const { return Vector::Zero(dim()); }

  double evaluate(const Vector& x, Vector* grad, Matrix* hess) const {
    const Vector g = domain_.evaluate(x);
    if ((g.array() <= 0.0).any()) return kNegInf;
    const double f = (counts_.array() * g.array().log()).sum();
    if (grad != nullptr || hess != nullptr) {
      const Vector cg = counts_.cwiseQuotient(g);
      if (grad != nullptr) *grad = domain_.rows.transpose() * cg;
      if (hess != nullptr) {
        const Vector cg2 = cg.cwiseQuotient(g);
        *hess = -(domain_.rows.transpose() * cg2.asDiagonal() * domain_.rows);
      }
    }
    return f;
  }

 private:
  AffineRows domain_;
  AffineRows barrier_;
  Vector counts_;
};

Matrix select_columns(const Matrix& m, const std::vector<Eigen::Index>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(cols[k]);
  return out;
}

// Equality-constrained Newton polish for the MELE dual: maximize f subject
// to the active vertex rows being exactly zero. Returns multipliers.
bool polish_active_set(const LogSumProblem& problem, Vector& x, std::vector<Eigen::Index>& active,
                       Vector& multipliers) {
  const AffineRows& vertices = problem.barrier();
  const Eigen::Index p = problem.dim();
  for (int round = 0; round < 12; ++round) {
    const auto na = static_cast<Eigen::Index>(active.size());
    Matrix b(na, p);
    for (Eigen::Index k = 0; k < na; ++k) b.row(k) = vertices.rows.row(active[static_cast<std::size_t>(k)]);
    Vector lambda = Vector::Zero(na);
    bool solved = false;
    for (int it = 0; it < 60; ++it) {
      Vector grad;
      Matrix hess;
      const double f = problem.evaluate(x, &grad, &hess);
      if (!std::isfinite(f)) return false;
      Matrix kkt = Matrix::Zero(p + na, p + na);
      kkt.topLeftCorner(p, p) = hess;
      kkt.topRightCorner(p, na) = b.transpose();
      kkt.bottomLeftCorner(na, p) = b;
      Vector rhs(p + na);
      rhs.head(p) = -grad;
      rhs.tail(na) = -(Vector::Ones(na) + b * x);
      Eigen::FullPivLU<Matrix> lu(kkt);
      if (!lu.isInvertible()) return false;
      const Vector sol = lu.solve(rhs);
      const Vector dir = sol.head(p);
      lambda = sol.tail(na);
      const double step = detail::fraction_to_boundary(problem.domain(), x, dir, 0.99);
      x += step * dir;
      if (step == 1.0 && dir.norm() <= 1e-14 * (1.0 + x.norm())) {
        solved = true;
        break;
      }
    }
    if (!solved) return false;
    // Multipliers must be non-negative for a maximum under h >= 0.
    Eigen::Index worst = -1;
    double worst_val = -1e-12;
    for (Eigen::Index k = 0; k < na; ++k) {
      if (lambda(k) < worst_val) {
        worst_val = lambda(k);
        worst = k;
      }
    }
    if (worst >= 0) {
      active.erase(active.begin() + worst);
      continue;
    }
    const Vector h = vertices.evaluate(x);
    Eigen::Index violated = -1;
    double most = -1e-12;
    for (Eigen::Index k = 0; k < h.size(); ++k) {
      if (std::find(active.begin(), active.end(), k) != active.end()) continue;
      if (h(k) < most) {
        most = h(k);
        violated = k;
      }
    }
    if (violated >= 0) {
      active.push_back(violated);
      continue;
    }
    multipliers = lambda;
    return true;
  }
  return false;
}

}  // namespace

DualEvaluation dual_objective(const LoggedDataset& ds, const Vector& v, const DualPoint& point) {
  const auto l = static_cast<Eigen::Index>(ds.policy_count());
  if (v.size() != l || point.beta.size() != l || point.tau.size() != l) {
    throw Error(ErrorCode::DimensionMismatch, "dual_objective: dimension mismatch");
  }
  DualEvaluation out{0.0, Vector::Zero(2 * l), Matrix::Zero(2 * l, 2 * l)};
  Vector a(2 * l);
  for (Eigen::Index i = 0; i < ds.weights().rows(); ++i) {
    const Vector w = ds.weights().row(i).transpose();
    const double r = ds.rewards()(i);
    a.head(l) = w.array() - 1.0;
    a.tail(l) = w * r - v;
    const double g = 1.0 + point.beta.dot(a.head(l)) + point.tau.dot(a.tail(l));
    if (!(g > 0.0)) {
      std::ostringstream msg;
      msg << "non-positive log argument " << g << " at observation " << i + 1;
      throw Error(ErrorCode::NonPositiveLogArgument, msg.str());
    }
    out.value += std::log(g);
    out.gradient += a / g;
    out.hessian -= (a * a.transpose()) / (g * g);
  }
  return out;
}

bool dual_feasible(const BoxSupport& support, const Vector& v, const DualPoint& point, double slack) {
  for (const SupportVertex& vert : support_vertices(support)) {
    const double h = 1.0 + point.beta.dot((vert.weights.array() - 1.0).matrix()) +
                     point.tau.dot(vert.weights * vert.reward - v);
    if (h < -slack) return false;
  }
  return true;
}

ElEvaluator::ElEvaluator(const LoggedDataset& ds, ElSettings settings)
    : ds_(ds), settings_(settings) {
  const auto l = static_cast<Eigen::Index>(ds_.policy_count());
  feasible_support_ = ds_.support().admits_unit_mean();
  for (Eigen::Index j = 0; j < l; ++j) {
    if (!ds_.support().collapsed(static_cast<std::size_t>(j))) free_axes_.push_back(j);
  }

  // Merge duplicate (w, r) observations.
  const auto n = static_cast<Eigen::Index>(ds_.size());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Matrix& w = ds_.weights();
  const Vector& r = ds_.rewards();
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < l; ++j) {
      if (w(a, j) != w(b, j)) return w(a, j) < w(b, j);
    }
    return r(a) < r(b);
  };
  auto row_equal = [&](Eigen::Index a, Eigen::Index b) {
    return !row_less(a, b) && !row_less(b, a);
  };
  std::sort(order.begin(), order.end(), row_less);
  std::vector<Eigen::Index> firsts;
  std::vector<double> counts;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && row_equal(order[k - 1], order[k])) {
      counts.back() += 1.0;
    } else {
      firsts.push_back(order[k]);
      counts.push_back(1.0);
    }
  }
  const auto m = static_cast<Eigen::Index>(firsts.size());
  atoms_.weights.resize(m, l);
  atoms_.rewards.resize(m);
  atoms_.counts = Eigen::Map<const Vector>(counts.data(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    atoms_.weights.row(k) = w.row(firsts[static_cast<std::size_t>(k)]);
    atoms_.rewards(k) = r(firsts[static_cast<std::size_t>(k)]);
  }
  atom_centered_ = select_columns((atoms_.weights.array() - 1.0).matrix(), free_axes_);
  atom_value_ = atoms_.weights.array().colwise() * atoms_.rewards.array();

  const auto verts = support_vertices(ds_.support());
  const auto nv = static_cast<Eigen::Index>(verts.size());
  Matrix vw(nv, l);
  for (Eigen::Index k = 0; k < nv; ++k) vw.row(k) = verts[static_cast<std::size_t>(k)].weights.transpose();
  Vector vr(nv);
  for (Eigen::Index k = 0; k < nv; ++k) vr(k) = verts[static_cast<std::size_t>(k)].reward;
  vertex_centered_ = select_columns((vw.array() - 1.0).matrix(), free_axes_);
  vertex_value_ = vw.array().colwise() * vr.array();

  if (feasible_support_) {
    try {
      mele_ = compute_mele();
    } catch (...) {
      mele_error_ = std::current_exception();
    }
  }
}

ElSolution ElEvaluator::solve_moment(const Matrix& atom_moments, const Matrix& vertex_moments,
                                     const Vector& target, const DualPoint* warm) const {
  const auto nf = static_cast<Eigen::Index>(free_axes_.size());
  const auto q = target.size();
  const auto l = static_cast<Eigen::Index>(policy_count());
  ElSolution out;
  out.dual.beta = Vector::Zero(l);
  out.dual.tau = Vector::Zero(q);
  if (!feasible_support_) {
    out.loglik = LogLik::neg_infinity();
    return out;
  }

  Matrix atom_rows(atom_centered_.rows(), nf + q);
  atom_rows.leftCols(nf) = atom_centered_;
  atom_rows.rightCols(q) = atom_moments.rowwise() - target.transpose();
  Matrix vertex_rows(vertex_centered_.rows(), nf + q);
  vertex_rows.leftCols(nf) = vertex_centered_;
  vertex_rows.rightCols(q) = vertex_moments.rowwise() - target.transpose();
  const LogSumProblem problem(std::move(atom_rows), atoms_.counts, std::move(vertex_rows));

  Vector start;
  const Vector* start_ptr = nullptr;
  if (warm != nullptr && warm->beta.size() == l && warm->tau.size() == q) {
    start.resize(nf + q);
    for (Eigen::Index k = 0; k < nf; ++k) start(k) = warm->beta(free_axes_[static_cast<std::size_t>(k)]);
    start.tail(q) = warm->tau;
    start_ptr = &start;
  }
  BarrierResult res = maximize_with_barrier(problem, start_ptr, settings_.barrier);
  if (start_ptr != nullptr && !res.converged && !res.diverged) {
    const int spent = res.iterations;
    res = maximize_with_barrier(problem, nullptr, settings_.barrier);
    res.iterations += spent;
  }
  if (!res.diverged) {
    std::vector<Eigen::Index> active;
    const Vector h = problem.barrier().evaluate(res.x);
    for (Eigen::Index k = 0; k < h.size(); ++k) {
      if (h(k) < 1e-5) active.push_back(k);
    }
    Vector polished = res.x;
    Vector multipliers;
    if (!active.empty() && polish_active_set(problem, polished, active, multipliers)) {
      const double value = problem.evaluate(polished, nullptr, nullptr);
      if (std::isfinite(value) && value >= res.value) {
        res.x = polished;
        res.value = value;
        res.converged = true;
      }
    }
  }
  out.iterations = res.iterations;
  for (Eigen::Index k = 0; k < nf; ++k) out.dual.beta(free_axes_[static_cast<std::size_t>(k)]) = res.x(k);
  out.dual.tau = res.x.tail(q);
  if (res.diverged) {
    out.loglik = LogLik::neg_infinity();
    return out;
  }
  out.converged = res.converged;
  out.loglik = LogLik(-res.value);
  if (!res.converged && settings_.throw_on_max_iterations) {
    throw MaxIterationsError("empirical-likelihood dual did not converge", -res.value);
  }
  return out;
}

ElSolution ElEvaluator::value(const Vector& v, const DualPoint* warm) const {
  if (v.size() != static_cast<Eigen::Index>(policy_count())) {
    throw Error(ErrorCode::DimensionMismatch, "value vector length differs from policy count");
  }
  if (!v.allFinite()) throw Error(ErrorCode::InvalidArgument, "value vector must be finite");
  return solve_moment(atom_value_, vertex_value_, v, warm);
}

ElSolution ElEvaluator::difference(double d, const DualPoint* warm) const {
  if (policy_count() != 2) {
    throw Error(ErrorCode::WrongPolicyCount, "difference likelihood needs exactly two policies");
  }
  if (!std::isfinite(d)) throw Error(ErrorCode::InvalidArgument, "difference must be finite");
  const Vector t = difference_direction();
  const Vector target = Vector::Constant(1, d);
  return solve_moment(atom_value_ * t, vertex_value_ * t, target, warm);
}

ElSolution ElEvaluator::profile(std::size_t j, double vj, const DualPoint* warm) const {
  if (j >= policy_count()) throw Error(ErrorCode::DimensionMismatch, "profile index out of range");
  const auto col = static_cast<Eigen::Index>(j);
  const Vector target = Vector::Constant(1, vj);
  return solve_moment(atom_value_.col(col), vertex_value_.col(col), target, warm);
}

const MeleResult& ElEvaluator::mele() const {
  if (!feasible_support_) {
    throw Error(ErrorCode::InfeasibleSupport,
                "weight bounds exclude 1 for some policy; E[w] = 1 is unattainable");
  }
  if (mele_error_) std::rethrow_exception(mele_error_);
  return *mele_;
}

MeleResult ElEvaluator::compute_mele() const {
  const auto l = static_cast<Eigen::Index>(policy_count());
  const auto nf = static_cast<Eigen::Index>(free_axes_.size());
  const auto n = static_cast<double>(ds_.size());

  const auto wverts = weight_vertices(ds_.support());
  const auto nv = static_cast<Eigen::Index>(wverts.size());
  Matrix vertex_rows(nv, nf);
  for (Eigen::Index k = 0; k < nv; ++k) {
    for (Eigen::Index c = 0; c < nf; ++c) {
      vertex_rows(k, c) = wverts[static_cast<std::size_t>(k)](free_axes_[static_cast<std::size_t>(c)]) - 1.0;
    }
  }
  const LogSumProblem problem(atom_centered_, atoms_.counts, vertex_rows);
  Vector beta_free = Vector::Zero(nf);
  if (nf > 0) {
    const BarrierResult res = maximize_with_barrier(problem, nullptr, settings_.barrier);
    if (res.diverged) {
      throw Error(ErrorCode::SolverFailure, "MELE dual diverged");
    }
    beta_free = res.x;
    std::vector<Eigen::Index> active;
    const Vector h = problem.barrier().evaluate(beta_free);
    for (Eigen::Index k = 0; k < h.size(); ++k) {
      if (h(k) < 1e-5) active.push_back(k);
    }
    Vector polished = beta_free;
    Vector multipliers;
    if (polish_active_set(problem, polished, active, multipliers)) {
      beta_free = polished;
    } else if (!res.converged) {
      throw MaxIterationsError("MELE dual did not converge", res.value);
    }
    // Directions the data do not see leave the objective flat; take the minimum-norm maximizer.
    const Vector fitted = atom_centered_ * beta_free;
    const Vector min_norm = atom_centered_.completeOrthogonalDecomposition().solve(fitted);
    const double mass = (fitted.array() + 1.0).inverse().matrix().dot(atoms_.counts) / n;
    if (std::abs(1.0 - mass) <= settings_.unique_tolerance && (atom_centered_ * min_norm - fitted).norm() <= 1e-12 &&
        (vertex_rows * min_norm).array().minCoeff() > -1.0 + settings_.tol_active) {
      beta_free = min_norm;
    }
  }

  MeleResult out;
  out.beta_star = Vector::Zero(l);
  for (Eigen::Index c = 0; c < nf; ++c) out.beta_star(free_axes_[static_cast<std::size_t>(c)]) = beta_free(c);
  out.dual_value = problem.evaluate(beta_free, nullptr, nullptr);
  out.max_loglik = LogLik(-out.dual_value);

  const Matrix& w = ds_.weights();
  const Vector g = Vector::Ones(w.rows()) + (w.array() - 1.0).matrix() * out.beta_star;
  out.data_masses = (g * n).cwiseInverse();
  out.residual_mass = 1.0 - out.data_masses.sum();
  out.value_lo = w.transpose() * (ds_.rewards().cwiseProduct(out.data_masses));
  out.value_hi = out.value_lo;
  out.boundary_masses = Vector::Zero(0);

  if (out.residual_mass > settings_.unique_tolerance) {
    const Vector vh = (Vector::Ones(nv) + vertex_rows * beta_free);
    for (Eigen::Index k = 0; k < nv; ++k) {
      if (std::abs(vh(k)) < settings_.tol_active) out.boundary_atoms.push_back(wverts[static_cast<std::size_t>(k)]);
    }
    const auto na = static_cast<Eigen::Index>(out.boundary_atoms.size());
    if (na == 0) {
      throw Error(ErrorCode::InconsistentBoundaryAllocation,
                  "residual mass is positive but no support vertex is active");
    }
    Matrix system(l + 1, na);
    for (Eigen::Index k = 0; k < na; ++k) {
      system(0, k) = 1.0;
      system.block(1, k, l, 1) = out.boundary_atoms[static_cast<std::size_t>(k)];
    }
    Vector rhs(l + 1);
    rhs(0) = out.residual_mass;
    rhs.tail(l) = Vector::Ones(l) - w.transpose() * out.data_masses;
    out.boundary_masses = system.completeOrthogonalDecomposition().solve(rhs);
    const double residual = (system * out.boundary_masses - rhs).norm();
    if (!(residual <= settings_.residual_tolerance)) {
      std::ostringstream msg;
      msg << "boundary allocation residual " << residual << " exceeds tolerance";
      throw Error(ErrorCode::InconsistentBoundaryAllocation, msg.str());
    }
    for (Eigen::Index k = 0; k < na; ++k) {
      out.value_hi += out.boundary_atoms[static_cast<std::size_t>(k)] * out.boundary_masses(k);
    }
  }
  return out;
}

LogLik log_el_value(const LoggedDataset& ds, const Vector& v) {
  return ElEvaluator(ds).value(v).loglik;
}

LogLik log_el_diff(const LoggedDataset& ds, double d) {
  return ElEvaluator(ds).difference(d).loglik;
}

MeleResult mele(const LoggedDataset& ds) { return ElEvaluator(ds).mele(); }

}  // namespace elbandit
