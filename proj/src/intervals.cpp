#include "elbandit/intervals.hpp"

#include <string>

namespace elbandit {

double chi2_quantile(int df, double q) {
  if (!(q >= 0.0 && q < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "chi-squared quantile level must lie in [0, 1)");
  }
  switch (df) {
    case 1: {
      const double z = normal_quantile(0.5 * (1.0 + q));
      return z * z;
    }
    case 2:
      return -2.0 * std::log1p(-q);
    default:
      throw Error(ErrorCode::UnsupportedDf,
                  "chi-squared quantile only implemented for df 1 and 2, got " + std::to_string(df));
  }
}

namespace {

struct RatioCurve {
  const ElEvaluator& ev;
  LogLik max;
  DualPoint warm;
  bool have_warm = false;

  double operator()(double v) {
    const ElSolution s = ev.value(Vector::Constant(1, v), have_warm ? &warm : nullptr);
    if (s.loglik.finite()) {
      warm = s.dual;
      have_warm = true;
    }
    return s.loglik.ratio_to(max);
  }
};

// Walks from `inside` towards `limit` until the ratio drops below the
// threshold, then bisects. Returns `limit` when the whole side clears.
double find_crossing(RatioCurve& curve, double inside, double limit, double threshold) {
  const double direction = limit > inside ? 1.0 : -1.0;
  double step = 1e-3;
  double good = inside;
  double bad = limit;
  bool bracketed = false;
  while (true) {
    double trial = inside + direction * step;
    if ((trial - limit) * direction >= 0.0) trial = limit;
    const double ratio = curve(trial);
    if (ratio < threshold) {
      bad = trial;
      bracketed = true;
      break;
    }
    good = trial;
    if (trial == limit) break;
    step *= 2.0;
  }
  if (!bracketed) return limit;
  for (int it = 0; it < 80 && std::abs(bad - good) > 1e-11; ++it) {
    const double mid = 0.5 * (good + bad);
    if (curve(mid) >= threshold) {
      good = mid;
    } else {
      bad = mid;
    }
  }
  return 0.5 * (good + bad);
}

}  // namespace

WilksInterval wilks_interval(const ElEvaluator& ev, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  }
  if (ev.policy_count() != 1) {
    throw Error(ErrorCode::WrongPolicyCount, "Wilks intervals are defined for a single policy");
  }
  const MeleResult& m = ev.mele();
  WilksInterval out;
  out.alpha = alpha;
  out.threshold_log = -0.5 * chi2_quantile(1, 1.0 - alpha);
  RatioCurve curve{ev, m.max_loglik, {}, false};
  out.lo = find_crossing(curve, m.value_lo(0), 0.0, out.threshold_log);
  curve.have_warm = false;
  out.hi = find_crossing(curve, m.value_hi(0), 1.0, out.threshold_log);
  return out;
}

WilksInterval wilks_interval(const LoggedDataset& ds, double alpha) {
  return wilks_interval(ElEvaluator(ds), alpha);
}

}  // namespace elbandit
