#include "elbandit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "elbandit/parallel.hpp"

namespace elbandit {

namespace {

std::uint64_t name_key(const std::string& name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t n, std::size_t replicate) {
  return derive_seed(derive_seed(seed, streams::kReplicate, n), streams::kEvaluation, replicate);
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw Error(ErrorCode::InvalidArgument, "malformed number '" + item + "' in policy recipe");
    }
    out.push_back(value);
  }
  return out;
}

void check_failures(std::size_t failures, std::size_t attempted, const std::string& what) {
  if (attempted > 0 && failures * 1000 >= attempted && failures > 0) {
    std::ostringstream msg;
    msg << what << ": " << failures << " of " << attempted << " replicates failed (limit is below 0.1%)";
    throw Error(ErrorCode::SolverFailure, msg.str());
  }
}

}  // namespace

const char* to_string(IntervalKind kind) { return kind == IntervalKind::Hpd ? "hpd" : "wilks"; }

const char* to_string(ComparisonMode mode) {
  switch (mode) {
    case ComparisonMode::Absolute:
      return "absolute";
    case ComparisonMode::Relative:
      return "relative";
    case ComparisonMode::Diff:
      return "diff";
  }
  return "?";
}

PolicyRecipe recipe_by_name(const std::string& name, std::size_t train_n) {
  if (name == "baseline") return baseline_recipe();
  if (name == "new") return new_recipe();
  const std::string prefix = "custom:";
  if (name.rfind(prefix, 0) == 0) {
    const std::vector<double> p = parse_numbers(name.substr(prefix.size()));
    if (p.size() != 3 || p[2] != std::floor(p[2]) || p[2] < 1.0) {
      throw Error(ErrorCode::InvalidArgument, "custom policy must be custom:m,s,kprime with integer kprime >= 1");
    }
    return {name, train_n, p[0], p[1], static_cast<int>(p[2])};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown policy recipe '" + name + "'");
}

std::vector<std::size_t> default_size_ladder() { return {32, 64, 128, 256, 512, 1024, 2048}; }

CoverageConfig coverage_preset(const std::string& name) {
  CoverageConfig c;
  if (name == "full") return c;
  if (name == "quick") {
    c.sizes = {32, 128, 512};
    c.replicates = 200;
    c.mc_samples = 200000;
    return c;
  }
  if (name == "undercoverage") {
    c.policies = {"new"};
    c.sizes = {default_size_ladder().front()};
    return c;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown coverage preset '" + name + "'");
}

ComparisonConfig comparison_preset(const std::string& name) {
  ComparisonConfig c;
  if (name == "full") return c;
  if (name == "quick") {
    c.replicates = 100;
    c.grid_points_2d = 200;
    c.grid_points_1d = 2000;
    return c;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown comparison preset '" + name + "'");
}

double sample_quantile(std::vector<double> data, double q) {
  if (data.empty()) return 0.0;
  std::sort(data.begin(), data.end());
  const double pos = q * static_cast<double>(data.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, data.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return data[lo] + t * (data[hi] - data[lo]);
}

const CoverageCell* CoverageReport::find(const std::string& policy, IntervalKind kind, double level,
                                         std::size_t n) const {
  for (const CoverageCell& c : cells) {
    if (c.policy == policy && c.kind == kind && std::abs(c.level - level) < 1e-12 && c.n == n) return &c;
  }
  return nullptr;
}

CoverageReport coverage_run(const CoverageConfig& config) {
  config.env.validate();
  for (double level : config.levels) {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "levels must lie in (0, 1)");
  }
  CoverageReport report;
  for (double level : config.levels) {
    report.wilks_relative_threshold.push_back(std::exp(-0.5 * chi2_quantile(1, level)));
  }
  if (config.replicates == 0) return report;

  struct Target {
    std::string name;
    PolicyRecipe recipe;
    LearnedPolicy policy;
    double truth = 0.0;
  };
  std::vector<Target> targets;
  for (const std::string& name : config.policies) {
    Target t{name, recipe_by_name(name), {}, 0.0};
    if (!config.redraw_policy) {
      t.policy = train_policy(config.env, t.recipe, derive_seed(config.seed, streams::kTraining, name_key(name)));
      const McEstimate mc = mc_true_value(t.policy, config.env, config.mc_samples,
                                          derive_seed(config.seed, streams::kMonteCarlo, name_key(name)),
                                          config.threads);
      t.truth = mc.value;
      report.truths.push_back({name, mc.value, mc.std_error});
    }
    targets.push_back(std::move(t));
  }

  const std::size_t per_policy = config.sizes.size() * config.replicates;
  const std::size_t total = targets.size() * per_policy;
  report.records.resize(total);
  PosteriorSettings post_settings;
  post_settings.grid_points = config.grid_points;
  post_settings.quantile = config.quantile;

  parallel_for(total, config.threads, [&](std::size_t k) {
    const Target& target = targets[k / per_policy];
    const std::size_t rest = k % per_policy;
    const std::size_t n = config.sizes[rest / config.replicates];
    const std::size_t r = rest % config.replicates;
    CoverageRecord& rec = report.records[k];
    rec.policy = target.name;
    rec.n = n;
    rec.replicate = r;
    try {
      const LearnedPolicy* policy = &target.policy;
      rec.true_value = target.truth;
      LearnedPolicy redrawn;
      if (config.redraw_policy) {
        const std::uint64_t s = replicate_seed(config.seed, n, r);
        redrawn = train_policy(config.env, target.recipe, derive_seed(s, streams::kTraining, name_key(target.name)));
        rec.true_value = mc_true_value(redrawn, config.env, config.mc_samples,
                                       derive_seed(s, streams::kMonteCarlo, name_key(target.name)))
                             .value;
        policy = &redrawn;
      }
      const auto log = generate_log(config.env, n, replicate_seed(config.seed, n, r));
      const LoggedDataset ds = build_logged_dataset(log, {Policy(*policy)}, config.env);
      const ElEvaluator ev(ds);
      const SubSupport region = sub_support(ev, Mode::Value, config.quantile);
      rec.sub_support = region.bounds[0];
      const GridPosterior post = build_posterior(ev, Mode::Value, PriorSpec::flat(), region, post_settings);
      for (double level : config.levels) {
        rec.hpd.push_back(hpd_interval(post, 1.0 - level));
        rec.wilks.push_back(wilks_interval(ev, 1.0 - level).interval());
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.failure = e.what();
      rec.hpd.clear();
      rec.wilks.clear();
    }
  });

  report.attempted = total;
  for (const CoverageRecord& rec : report.records) report.failures += rec.failed ? 1 : 0;
  check_failures(report.failures, report.attempted, "coverage run");

  for (const Target& target : targets) {
    for (std::size_t n : config.sizes) {
      for (std::size_t li = 0; li < config.levels.size(); ++li) {
        for (IntervalKind kind : {IntervalKind::Hpd, IntervalKind::Wilks}) {
          CoverageCell cell;
          cell.policy = target.name;
          cell.kind = kind;
          cell.level = config.levels[li];
          cell.n = n;
          std::vector<double> widths;
          std::size_t hits = 0;
          for (const CoverageRecord& rec : report.records) {
            if (rec.failed || rec.policy != target.name || rec.n != n) continue;
            const Interval& iv = kind == IntervalKind::Hpd ? rec.hpd[li] : rec.wilks[li];
            widths.push_back(iv.width());
            hits += iv.contains(rec.true_value) ? 1 : 0;
          }
          cell.replicates = widths.size();
          if (!widths.empty()) {
            const auto count = static_cast<double>(widths.size());
            cell.coverage = static_cast<double>(hits) / count;
            cell.mc_error = std::sqrt(cell.coverage * (1.0 - cell.coverage) / count);
            double sum = 0.0;
            for (double w : widths) sum += w;
            cell.mean_width = sum / count;
            const std::array<double, 5> qs{0.05, 0.25, 0.5, 0.75, 0.95};
            for (std::size_t q = 0; q < qs.size(); ++q) cell.width_quantiles[q] = sample_quantile(widths, qs[q]);
          }
          report.cells.push_back(cell);
        }
      }
    }
  }
  return report;
}

const ComparisonCell* ComparisonReport::find(double margin, ComparisonMode mode, std::size_t n) const {
  for (const ComparisonCell& c : cells) {
    if (std::abs(c.margin - margin) < 1e-12 && c.mode == mode && c.n == n) return &c;
  }
  return nullptr;
}

double ComparisonReport::mean_diff_gap(double margin, std::size_t n) const {
  std::size_t m = margins.size();
  for (std::size_t k = 0; k < margins.size(); ++k) {
    if (std::abs(margins[k] - margin) < 1e-12) m = k;
  }
  if (m == margins.size()) throw Error(ErrorCode::InvalidArgument, "margin not part of the report");
  double sum = 0.0;
  std::size_t count = 0;
  for (const ComparisonRecord& rec : records) {
    if (rec.failed || rec.n != n || rec.diff.empty() || rec.absolute.empty()) continue;
    sum += std::abs(rec.diff[m] - rec.absolute[m]);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

ComparisonReport comparison_run(const ComparisonConfig& config, std::size_t mc_samples) {
  config.env.validate();
  ComparisonReport report;
  report.margins = config.margins;
  if (config.replicates == 0) return report;

  const bool want_abs = std::count(config.modes.begin(), config.modes.end(), ComparisonMode::Absolute) > 0;
  const bool want_rel = std::count(config.modes.begin(), config.modes.end(), ComparisonMode::Relative) > 0;
  const bool want_diff = std::count(config.modes.begin(), config.modes.end(), ComparisonMode::Diff) > 0;

  std::vector<Policy> policies;
  for (const std::string& name : {config.baseline, config.candidate}) {
    const LearnedPolicy p =
        train_policy(config.env, recipe_by_name(name), derive_seed(config.seed, streams::kTraining, name_key(name)));
    if (mc_samples > 0) {
      const McEstimate mc = mc_true_value(p, config.env, mc_samples,
                                          derive_seed(config.seed, streams::kMonteCarlo, name_key(name)),
                                          config.threads);
      report.truths.push_back({name, mc.value, mc.std_error});
    }
    policies.emplace_back(p);
  }

  const std::size_t total = config.sizes.size() * config.replicates;
  report.records.resize(total);
  PosteriorSettings joint_settings;
  joint_settings.grid_points = config.grid_points_2d;
  joint_settings.quantile = config.quantile;
  PosteriorSettings diff_settings;
  diff_settings.grid_points = config.grid_points_1d;
  diff_settings.quantile = config.quantile;

  parallel_for(total, config.threads, [&](std::size_t k) {
    const std::size_t n = config.sizes[k / config.replicates];
    const std::size_t r = k % config.replicates;
    ComparisonRecord& rec = report.records[k];
    rec.n = n;
    rec.replicate = r;
    try {
      const auto log = generate_log(config.env, n, replicate_seed(config.seed, n, r));
      const LoggedDataset ds = build_logged_dataset(log, policies, config.env);
      const ElEvaluator ev(ds);
      if (want_abs || want_rel) {
        const GridPosterior joint = build_posterior(ev, Mode::Value, PriorSpec::flat(), joint_settings);
        for (double delta : config.margins) {
          if (want_abs) rec.absolute.push_back(prob_region(joint, Absolute{delta}));
          if (want_rel) rec.relative.push_back(prob_region(joint, Relative{delta}));
        }
      }
      if (want_diff) {
        const GridPosterior diff = build_posterior(ev, Mode::Diff, PriorSpec::flat(), diff_settings);
        for (double delta : config.margins) rec.diff.push_back(prob_diff(diff, delta));
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.failure = e.what();
      rec.absolute.clear();
      rec.relative.clear();
      rec.diff.clear();
    }
  });

  report.attempted = total;
  for (const ComparisonRecord& rec : report.records) report.failures += rec.failed ? 1 : 0;
  check_failures(report.failures, report.attempted, "comparison run");

  for (std::size_t n : config.sizes) {
    for (ComparisonMode mode : config.modes) {
      for (std::size_t m = 0; m < config.margins.size(); ++m) {
        ComparisonCell cell;
        cell.margin = config.margins[m];
        cell.mode = mode;
        cell.n = n;
        std::vector<double> values;
        for (const ComparisonRecord& rec : report.records) {
          if (rec.failed || rec.n != n) continue;
          const std::vector<double>& src =
              mode == ComparisonMode::Absolute ? rec.absolute : (mode == ComparisonMode::Relative ? rec.relative : rec.diff);
          values.push_back(src[m]);
        }
        cell.replicates = values.size();
        if (!values.empty()) {
          double sum = 0.0;
          for (double v : values) sum += v;
          cell.mean = sum / static_cast<double>(values.size());
          cell.band_lo = sample_quantile(values, 0.025);
          cell.band_hi = sample_quantile(values, 0.975);
        }
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

}  // namespace elbandit
