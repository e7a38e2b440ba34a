#include "elbandit/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "elbandit/dataset.hpp"
#include "elbandit/parallel.hpp"

namespace elbandit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Concave dual of the sub-support bound in (gamma, beta_free):
/// -gamma - sum(beta) + A * exp((1/n) sum_k c_k log u_k), where
constexpr double kSubSupportRetryFloor = 1e-6;
constexpr double kSubSupportRetryCap = 1e3;

/// u = gamma + beta . w + offset.
class SubSupportProblem {
 public:
  SubSupportProblem(AffineRows atoms, Vector counts, AffineRows vertices, double scale)
      : domain_(std::move(atoms)),
        barrier_(std::move(vertices)),
        counts_(std::move(counts)),
        n_(counts_.sum()),
        log_scale_(std::log(scale)) {}

  Eigen::Index dim() const { return domain_.rows.cols(); }
  const AffineRows& domain() const { return domain_; }
  const AffineRows& barrier() const { return barrier_; }

  Vector reference_point() const {
    Vector x = Vector::Zero(dim());
    const double spread = std::max(domain_.offsets.cwiseAbs().maxCoeff(),
                                   barrier_.size() > 0 ? barrier_.offsets.cwiseAbs().maxCoeff() : 0.0);
    x(0) = 1.0 + spread;
    return x;
  }

  double evaluate(const Vector& x, Vector* grad, Matrix* hess) const {
    const Vector u = domain_.evaluate(x);
    if ((u.array() <= 0.0).any()) return kNegInf;
    const double h = (counts_.array() * u.array().log()).sum() / n_;
    const double geo = std::exp(log_scale_ + h);
    const double linear = -x.sum();
    if (grad != nullptr || hess != nullptr) {
      const Vector cu = counts_.cwiseQuotient(u) / n_;
      const Vector dh = domain_.rows.transpose() * cu;
      if (grad != nullptr) *grad = geo * dh - Vector::Ones(dim());
      if (hess != nullptr) {
        const Vector cu2 = cu.cwiseQuotient(u);
        *hess = geo * (dh * dh.transpose() - domain_.rows.transpose() * cu2.asDiagonal() * domain_.rows);
      }
    }
    return linear + geo;
  }

 private:
  AffineRows domain_;
  AffineRows barrier_;
  Vector counts_;
  double n_;
  double log_scale_;
};

// Infimum over {Q : log L(Q) >= phi} of sum (direction . w r) Q; empty when
// the dual degenerates near log_c = 0.
std::optional<double> sub_support_infimum(const ElEvaluator& ev, const Vector& direction, double log_c) {
  const MeleResult& m = ev.mele();
  const auto& free = ev.free_axes();
  const auto nf = static_cast<Eigen::Index>(free.size());
  const Matrix& aw = ev.atom_weights();
  const Vector& ar = ev.atom_rewards();
  const double n = ev.atom_counts().sum();

  AffineRows atoms;
  atoms.rows.resize(aw.rows(), nf + 1);
  atoms.rows.col(0).setOnes();
  for (Eigen::Index c = 0; c < nf; ++c) atoms.rows.col(c + 1) = aw.col(free[static_cast<std::size_t>(c)]);
  atoms.offsets = (aw * direction).cwiseProduct(ar);

  const auto verts = support_vertices(ev.dataset().support());
  const auto nv = static_cast<Eigen::Index>(verts.size());
  AffineRows vertices;
  vertices.rows.resize(nv, nf + 1);
  vertices.offsets.resize(nv);
  for (Eigen::Index k = 0; k < nv; ++k) {
    const SupportVertex& vert = verts[static_cast<std::size_t>(k)];
    vertices.rows(k, 0) = 1.0;
    for (Eigen::Index c = 0; c < nf; ++c) vertices.rows(k, c + 1) = vert.weights(free[static_cast<std::size_t>(c)]);
    vertices.offsets(k) = direction.dot(vert.weights) * vert.reward;
  }

  const double scale = std::exp(-(m.dual_value + log_c) / n);
  const SubSupportProblem problem(std::move(atoms), ev.atom_counts(), std::move(vertices), scale);
  const BarrierResult res = maximize_with_barrier(problem, nullptr, ev.settings().barrier);
  if (res.diverged) return std::nullopt;
  if (!std::isfinite(res.value)) {
    throw Error(ErrorCode::SolverFailure, "sub-support dual produced a non-finite value");
  }
  if (!res.converged && !res.diverged && ev.settings().throw_on_max_iterations) {
    throw MaxIterationsError("sub-support dual did not converge", res.value);
  }
  return res.value;
}

double log_beta_density(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) {
    if ((x == 0.0 && a == 1.0) || (x == 1.0 && b == 1.0)) {
      return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    }
    return kNegInf;
  }
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  double out = -lbeta;
  if (a != 1.0) out += (a - 1.0) * std::log(x);
  if (b != 1.0) out += (b - 1.0) * std::log1p(-x);
  return out;
}

double interpolate(const Vector& grid, const Vector& values, double x) {
  const Eigen::Index m = grid.size();
  if (x < grid(0) || x > grid(m - 1)) return 0.0;
  const double* begin = grid.data();
  const double* it = std::upper_bound(begin, begin + m, x);
  auto hi = static_cast<Eigen::Index>(it - begin);
  if (hi >= m) return values(m - 1);
  const Eigen::Index lo = hi - 1;
  const double t = (x - grid(lo)) / (grid(hi) - grid(lo));
  return values(lo) + t * (values(hi) - values(lo));
}

double compensated_sum(const Vector& v) {
  double sum = 0.0;
  double carry = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double y = v(k) - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

const char* to_string(Mode mode) { return mode == Mode::Value ? "value" : "diff"; }

bool SubSupport::contains(const Vector& point) const {
  if (point.size() != static_cast<Eigen::Index>(bounds.size())) return false;
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    if (!bounds[j].contains(point(static_cast<Eigen::Index>(j)))) return false;
  }
  return true;
}

Interval sub_support_dual(const ElEvaluator& ev, const Vector& direction, double log_c,
                          const Interval& natural_range) {
  if (!(log_c >= 0.0) || !std::isfinite(log_c)) {
    throw Error(ErrorCode::InvalidArgument, "log c must be finite and non-negative");
  }
  if (direction.size() != static_cast<Eigen::Index>(ev.policy_count())) {
    throw Error(ErrorCode::DimensionMismatch, "direction length differs from policy count");
  }
  const MeleResult& m = ev.mele();
  const Vector& box_lo = m.value_lo;
  const Vector& box_hi = m.value_hi;
  const double mele_lo = direction.cwiseProduct(box_lo).cwiseMin(direction.cwiseProduct(box_hi)).sum();
  const double mele_hi = direction.cwiseProduct(box_lo).cwiseMax(direction.cwiseProduct(box_hi)).sum();
  Interval out{mele_lo, mele_hi};
  if (log_c > 0.0) {
    std::optional<double> lo;
    std::optional<double> hi;
    for (double level = log_c; level < kSubSupportRetryCap; level = std::max(2.0 * level, kSubSupportRetryFloor)) {
      if (!lo) lo = sub_support_infimum(ev, direction, level);
      if (!hi) {
        const auto neg = sub_support_infimum(ev, -direction, level);
        if (neg) hi = -*neg;
      }
      if (lo && hi) break;
    }
    if (!lo || !hi) throw Error(ErrorCode::SolverFailure, "sub-support dual degenerated at every retry level");
    out = {std::min({*lo, *hi, mele_lo}), std::max({*lo, *hi, mele_hi})};
  }
  out.lo = std::clamp(out.lo, natural_range.lo, natural_range.hi);
  out.hi = std::clamp(out.hi, natural_range.lo, natural_range.hi);
  return out;
}

Interval sub_support_dual(const ElEvaluator& ev, std::size_t j, double log_c) {
  if (j >= ev.policy_count()) throw Error(ErrorCode::DimensionMismatch, "policy index out of range");
  const Vector e = Vector::Unit(static_cast<Eigen::Index>(ev.policy_count()), static_cast<Eigen::Index>(j));
  return sub_support_dual(ev, e, log_c, {0.0, 1.0});
}

Interval sub_support_dual_diff(const ElEvaluator& ev, double log_c) {
  if (ev.policy_count() != 2) {
    throw Error(ErrorCode::WrongPolicyCount, "difference sub-support needs exactly two policies");
  }
  return sub_support_dual(ev, difference_direction(), log_c, {-1.0, 1.0});
}

int sub_support_df(std::size_t policy_count, Mode mode) {
  if (mode == Mode::Diff || policy_count == 1) return 1;
  if (policy_count == 2) return 2;
  throw Error(ErrorCode::UnsupportedDf, "sub-support calibration covers one or two policies");
}

SubSupport sub_support(const ElEvaluator& ev, Mode mode, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "sub-support quantile must lie in (0, 1)");
  }
  SubSupport out;
  out.mode = mode;
  out.df = sub_support_df(ev.policy_count(), mode);
  out.threshold_log_c = 0.5 * chi2_quantile(out.df, quantile);
  out.phi = ev.mele().max_loglik.value() - out.threshold_log_c;
  if (mode == Mode::Diff) {
    out.bounds.push_back(sub_support_dual_diff(ev, out.threshold_log_c));
  } else {
    for (std::size_t j = 0; j < ev.policy_count(); ++j) {
      out.bounds.push_back(sub_support_dual(ev, j, out.threshold_log_c));
    }
  }
  return out;
}

PriorSpec PriorSpec::flat() { return PriorSpec(); }

PriorSpec PriorSpec::beta_product(std::vector<std::pair<double, double>> params) {
  if (params.empty()) throw Error(ErrorCode::InvalidArgument, "Beta prior needs parameters");
  for (const auto& [a, b] : params) {
    if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw Error(ErrorCode::InvalidArgument, "Beta prior parameters must be positive and finite");
    }
  }
  PriorSpec out;
  out.kind_ = Kind::BetaProduct;
  out.beta_ = std::move(params);
  return out;
}

PriorSpec PriorSpec::tabulated(std::vector<Vector> grids, std::vector<Vector> values) {
  if (grids.empty() || grids.size() != values.size()) {
    throw Error(ErrorCode::InvalidArgument, "tabulated prior needs one value table per grid");
  }
  for (std::size_t k = 0; k < grids.size(); ++k) {
    const Vector& g = grids[k];
    const Vector& f = values[k];
    if (g.size() < 2 || g.size() != f.size()) {
      throw Error(ErrorCode::InvalidArgument, "tabulated prior grid and values must have equal length >= 2");
    }
    double integral = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g(i)) || !std::isfinite(f(i)) || f(i) < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "tabulated prior values must be finite and non-negative");
      }
      if (i > 0) {
        if (!(g(i) > g(i - 1))) {
          throw Error(ErrorCode::InvalidArgument, "tabulated prior grid must be strictly increasing");
        }
        integral += 0.5 * (f(i) + f(i - 1)) * (g(i) - g(i - 1));
      }
    }
    if (!(integral > 0.0) || !std::isfinite(integral)) {
      throw Error(ErrorCode::InvalidArgument, "tabulated prior must integrate to a positive finite number");
    }
  }
  PriorSpec out;
  out.kind_ = Kind::Tabulated;
  out.grids_ = std::move(grids);
  out.values_ = std::move(values);
  return out;
}

double PriorSpec::log_density(const Vector& point, Mode mode) const {
  switch (kind_) {
    case Kind::Flat:
      return 0.0;
    case Kind::BetaProduct: {
      double out = 0.0;
      for (Eigen::Index j = 0; j < point.size(); ++j) {
        const auto& [a, b] = beta_[beta_.size() == 1 ? 0 : static_cast<std::size_t>(j)];
        const double x = mode == Mode::Diff ? 0.5 * (point(j) + 1.0) : point(j);
        out += log_beta_density(x, a, b);
      }
      return out;
    }
    case Kind::Tabulated: {
      double out = 0.0;
      for (Eigen::Index j = 0; j < point.size(); ++j) {
        const std::size_t k = grids_.size() == 1 ? 0 : static_cast<std::size_t>(j);
        const double f = interpolate(grids_[k], values_[k], point(j));
        if (!(f > 0.0)) return kNegInf;
        out += std::log(f);
      }
      return out;
    }
  }
  return 0.0;
}

std::string PriorSpec::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::Flat:
      out << "flat";
      break;
    case Kind::BetaProduct:
      out << "beta";
      for (const auto& [a, b] : beta_) out << ":" << a << "," << b;
      break;
    case Kind::Tabulated:
      out << "table(" << grids_.size() << ")";
      break;
  }
  return out.str();
}

GridPosterior::GridPosterior(Mode mode, std::vector<GridAxis> axes, Vector log_density,
                             PosteriorDiagnostics diagnostics)
    : mode_(mode), axes_(std::move(axes)), log_density_(std::move(log_density)), diagnostics_(diagnostics) {
  std::size_t expected = 1;
  for (const GridAxis& a : axes_) {
    if (a.points == 0 || !(a.hi >= a.lo)) throw Error(ErrorCode::InvalidArgument, "invalid grid axis");
    expected *= a.points;
  }
  if (axes_.empty() || static_cast<std::size_t>(log_density_.size()) != expected) {
    throw Error(ErrorCode::DimensionMismatch, "log density size does not match the grid");
  }
  double top = kNegInf;
  for (Eigen::Index k = 0; k < log_density_.size(); ++k) {
    const double v = log_density_(k);
    if (std::isnan(v)) throw Error(ErrorCode::InvalidArgument, "log density contains NaN");
    if (v > top) top = v;
  }
  if (!std::isfinite(top)) {
    throw Error(ErrorCode::AllCellsInfeasible, "every grid cell has zero posterior density");
  }
  cell_mass_.resize(log_density_.size());
  for (Eigen::Index k = 0; k < log_density_.size(); ++k) {
    cell_mass_(k) = std::isfinite(log_density_(k)) ? std::exp(log_density_(k) - top) : 0.0;
  }
  const double total = compensated_sum(cell_mass_);
  log_norm_ = top + std::log(total);
  cell_mass_ /= total;
}

Vector GridPosterior::center(std::size_t cell) const {
  Vector out(static_cast<Eigen::Index>(axes_.size()));
  for (std::size_t a = axes_.size(); a-- > 0;) {
    const std::size_t i = cell % axes_[a].points;
    cell /= axes_[a].points;
    out(static_cast<Eigen::Index>(a)) = axes_[a].center(i);
  }
  return out;
}

std::size_t GridPosterior::argmax() const {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < cell_mass_.size(); ++k) {
    if (cell_mass_(k) > cell_mass_(best)) best = k;
  }
  return static_cast<std::size_t>(best);
}

Vector GridPosterior::marginal(std::size_t axis) const {
  if (axis >= axes_.size()) throw Error(ErrorCode::DimensionMismatch, "axis out of range");
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < axes_.size(); ++a) inner *= axes_[a].points;
  const std::size_t n = axes_[axis].points;
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < cell_mass_.size(); ++k) {
    out(static_cast<Eigen::Index>((static_cast<std::size_t>(k) / inner) % n)) += cell_mass_(k);
  }
  return out;
}

std::size_t default_grid_points(std::size_t dims) { return dims == 1 ? 10000 : 1000; }

GridPosterior build_posterior(const ElEvaluator& ev, Mode mode, const PriorSpec& prior,
                              const PosteriorSettings& settings) {
  const SubSupport region = sub_support(ev, mode, settings.quantile);
  return build_posterior(ev, mode, prior, region, settings);
}

GridPosterior build_posterior(const ElEvaluator& ev, Mode mode, const PriorSpec& prior,
                              const SubSupport& region, const PosteriorSettings& settings) {
  const std::size_t l = ev.policy_count();
  std::size_t dims = 0;
  if (mode == Mode::Diff) {
    if (l != 2) throw Error(ErrorCode::WrongPolicyCount, "difference posterior needs exactly two policies");
    dims = 1;
  } else {
    if (l > 2) throw Error(ErrorCode::WrongPolicyCount, "grid posteriors cover one or two policies");
    dims = l;
  }
  if (region.dims() != dims || region.mode != mode) {
    throw Error(ErrorCode::DimensionMismatch, "sub-support does not match the posterior mode");
  }
  const std::size_t points = settings.grid_points == 0 ? default_grid_points(dims) : settings.grid_points;
  if (points < 100) throw Error(ErrorCode::InvalidArgument, "grid needs at least 100 points per axis");

  std::vector<GridAxis> axes;
  for (const Interval& b : region.bounds) axes.push_back({b.lo, b.hi, points});
  std::size_t cells = 1;
  for (const GridAxis& a : axes) cells *= a.points;

  const LogLik max = ev.mele().max_loglik;
  const std::size_t strip = dims == 1 ? std::max<std::size_t>(1, settings.strip_length) : points;
  const std::size_t strips = (cells + strip - 1) / strip;
  Vector log_density(static_cast<Eigen::Index>(cells));
  std::vector<PosteriorDiagnostics> strip_diag(strips);

  auto solve = [&](const Vector& at, const DualPoint* warm) -> ElSolution {
    if (mode == Mode::Diff) return ev.difference(at(0), warm);
    return ev.value(at, warm);
  };

  parallel_for(strips, settings.threads, [&](std::size_t s) {
    PosteriorDiagnostics& diag = strip_diag[s];
    DualPoint warm;
    bool have_warm = false;
    const std::size_t end = std::min(cells, (s + 1) * strip);
    Vector at(static_cast<Eigen::Index>(dims));
    for (std::size_t cell = s * strip; cell < end; ++cell) {
      std::size_t rest = cell;
      for (std::size_t a = dims; a-- > 0;) {
        at(static_cast<Eigen::Index>(a)) = axes[a].center(rest % axes[a].points);
        rest /= axes[a].points;
      }
      double value = kNegInf;
      const double lp = prior.log_density(at, mode);
      if (std::isfinite(lp)) {
        LogLik ll;
        try {
          const ElSolution sol = solve(at, have_warm ? &warm : nullptr);
          ll = sol.loglik;
          diag.newton_iterations += static_cast<std::size_t>(sol.iterations);
          if (!sol.converged) ++diag.nonconverged_cells;
          if (sol.loglik.finite()) {
            warm = sol.dual;
            have_warm = true;
          }
        } catch (const MaxIterationsError& e) {
          ll = LogLik(e.best_value());
          ++diag.nonconverged_cells;
        }
        if (ll.finite()) {
          value = lp + ll.ratio_to(max);
        } else {
          ++diag.infeasible_cells;
          have_warm = false;
        }
      }
      log_density(static_cast<Eigen::Index>(cell)) = value;
    }
  });

  PosteriorDiagnostics total;
  for (const PosteriorDiagnostics& d : strip_diag) {
    total.infeasible_cells += d.infeasible_cells;
    total.nonconverged_cells += d.nonconverged_cells;
    total.newton_iterations += d.newton_iterations;
  }
  return GridPosterior(mode, std::move(axes), std::move(log_density), total);
}

Interval hpd_interval(const GridPosterior& post, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (post.dims() != 1) throw Error(ErrorCode::DimensionMismatch, "HPD intervals need a 1-D posterior");
  const Vector& mass = post.cell_mass();
  const auto n = static_cast<std::size_t>(mass.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mass(static_cast<Eigen::Index>(a)) > mass(static_cast<Eigen::Index>(b));
  });
  const double target = 1.0 - alpha;
  auto tied = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); };

  std::vector<char> included(n, 0);
  double covered = 0.0;
  std::size_t k = 0;
  for (; k < n; ++k) {
    const auto idx = static_cast<Eigen::Index>(order[k]);
    included[order[k]] = 1;
    covered += mass(idx);
    if (covered >= target) break;
  }
  const double threshold = mass(static_cast<Eigen::Index>(order[std::min(k, n - 1)]));
  for (std::size_t t = k + 1; t < n; ++t) {
    const auto idx = static_cast<Eigen::Index>(order[t]);
    if (!tied(mass(idx), threshold)) break;
    included[order[t]] = 1;
    covered += mass(idx);
  }

  std::size_t first = 0;
  while (first < n && !included[first]) ++first;
  std::size_t last = n - 1;
  while (last > first && !included[last]) --last;
  // Symmetric trimming of tied cells at both ends.
  bool from_left = true;
  int blocked = 0;
  while (first < last && blocked < 2) {
    const std::size_t edge = from_left ? first : last;
    const double m = mass(static_cast<Eigen::Index>(edge));
    if (tied(m, threshold) && covered - m >= target) {
      covered -= m;
      included[edge] = 0;
      if (from_left) {
        while (first < last && !included[first]) ++first;
      } else {
        while (last > first && !included[last]) --last;
      }
      blocked = 0;
    } else {
      ++blocked;
    }
    from_left = !from_left;
  }
  const GridAxis& axis = post.axes()[0];
  return {axis.center(first), axis.center(last)};
}

bool satisfies(const Event& event, double v1, double v2) {
  return std::visit(
      [&](const auto& e) -> bool {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Absolute>) {
          return v2 > v1 + e.delta;
        } else if constexpr (std::is_same_v<T, Relative>) {
          return v2 > (1.0 + e.delta) * v1;
        } else if constexpr (std::is_same_v<T, HalfPlane>) {
          return e.a * v1 + e.b * v2 > e.c;
        } else {
          return e.first.contains(v1) && e.second.contains(v2);
        }
      },
      event);
}

namespace {

double event_mass(const GridPosterior& post, const Event& event, const Event* given) {
  const Vector& mass = post.cell_mass();
  const GridAxis& a0 = post.axes()[0];
  const GridAxis& a1 = post.axes()[1];
  double sum = 0.0;
  for (std::size_t i0 = 0; i0 < a0.points; ++i0) {
    const double v1 = a0.center(i0);
    for (std::size_t i1 = 0; i1 < a1.points; ++i1) {
      const double v2 = a1.center(i1);
      if (given != nullptr && !satisfies(*given, v1, v2)) continue;
      if (satisfies(event, v1, v2)) sum += mass(static_cast<Eigen::Index>(i0 * a1.points + i1));
    }
  }
  return sum;
}

}  // namespace

double prob_region(const GridPosterior& post, const Query& query) {
  if (post.dims() != 2 || post.mode() != Mode::Value) {
    throw Error(ErrorCode::DimensionMismatch, "region probabilities need a 2-D value posterior");
  }
  if (const auto* cond = std::get_if<Conditional>(&query)) {
    const double base = event_mass(post, cond->given, nullptr);
    if (base < 1e-12) {
      throw Error(ErrorCode::EmptyConditioningEvent, "conditioning event has negligible posterior mass");
    }
    const double joint = event_mass(post, cond->event, &cond->given);
    return std::clamp(joint / base, 0.0, 1.0);
  }
  const Event event = std::visit(
      [](const auto& q) -> Event {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Conditional>) {
          return Absolute{};
        } else {
          return q;
        }
      },
      query);
  return std::min(1.0, event_mass(post, event, nullptr));
}

double prob_diff(const GridPosterior& post, double delta) {
  if (post.dims() != 1 || post.mode() != Mode::Diff) {
    throw Error(ErrorCode::DimensionMismatch, "prob_diff needs a difference-mode posterior");
  }
  const GridAxis& axis = post.axes()[0];
  double sum = 0.0;
  for (std::size_t i = 0; i < axis.points; ++i) {
    if (axis.center(i) > delta) sum += post.cell_mass()(static_cast<Eigen::Index>(i));
  }
  return std::min(1.0, sum);
}

}  // namespace elbandit
