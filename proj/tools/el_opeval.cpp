// el_opeval: empirical-likelihood off-policy evaluation from the command line.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "elbandit/bandit.hpp"
#include "elbandit/config.hpp"
#include "elbandit/dataset.hpp"
#include "elbandit/el.hpp"
#include "elbandit/experiments.hpp"
#include "elbandit/intervals.hpp"
#include "elbandit/io.hpp"
#include "elbandit/posterior.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace elbandit;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
  std::string config;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

struct DataArgs {
  std::string path;
  std::string format = "weighted";
  std::string bounds;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed_opt->count() > 0) c.seed = g.seed;
  if (g.threads_opt->count() > 0) {
    c.threads = g.threads;
  } else if (const char* env = std::getenv("EL_OPEVAL_THREADS"); env != nullptr && g.config.empty()) {
    try {
      c.threads = std::stoi(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string("EL_OPEVAL_THREADS is not an integer: ") + env);
    }
  }
  if (g.out_opt->count() > 0) c.out = g.out;
  return c;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.out) / name).string();
}

LoggedDataset load_data(const DataArgs& args, RunConfig& c) {
  if (!args.bounds.empty()) c.bounds = parse_bounds(args.bounds);
  if (args.format == "weighted") {
    if (c.bounds.empty()) {
      throw Error(ErrorCode::ConfigMismatch, "weighted input needs declared bounds (--bounds or config 'bounds')");
    }
    return ingest_weighted_csv(args.path, c.bounds);
  }
  if (args.format == "raw") return ingest_raw_csv(args.path, c.bounds);
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + args.format + "'");
}

json vector_json(const Vector& v) {
  if (v.size() == 1) return v(0);
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

json interval_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

json sub_support_json(const SubSupport& s, double quantile) {
  json bounds = json::array();
  for (const Interval& b : s.bounds) bounds.push_back(interval_json(b));
  return {{"mode", to_string(s.mode)},
          {"bounds", bounds},
          {"log_c", s.threshold_log_c},
          {"phi", s.phi},
          {"df", s.df},
          {"quantile", quantile}};
}

json diagnostics_json(const MeleResult& m, const PosteriorDiagnostics& d) {
  return {{"mele_unique", m.unique()},
          {"residual_mass", m.residual_mass},
          {"max_loglik", m.max_loglik.value()},
          {"infeasible_cells", d.infeasible_cells},
          {"nonconverged_cells", d.nonconverged_cells},
          {"newton_iterations", d.newton_iterations}};
}

json base_summary(const std::string& command, const RunConfig& c) {
  return {{"command", command},
          {"seed", c.seed},
          {"timestamp", utc_timestamp()},
          {"config", json::parse(c.to_json())}};
}

std::string level_key(const std::string& prefix, double alpha) {
  return prefix + "_" + std::to_string(static_cast<int>(std::lround(100.0 * (1.0 - alpha))));
}

void write_summary(const RunConfig& c, const json& summary) {
  write_text_file(out_path(c, "summary.json"), summary.dump(2) + "\n");
}

ChartSeries density_series(const GridPosterior& post, const std::string& name) {
  ChartSeries s{name, {}, {}};
  const GridAxis& axis = post.axes()[0];
  for (std::size_t i = 0; i < axis.points; ++i) {
    s.x.push_back(axis.center(i));
    s.y.push_back(post.cell_mass()(static_cast<Eigen::Index>(i)) / axis.width());
  }
  return s;
}

int run_eval(const Globals& g, DataArgs data, const std::string& alphas, std::size_t grid, const std::string& prior,
             double quantile) {
  RunConfig c = resolve_config(g);
  if (!alphas.empty()) c.alphas = parse_number_list(alphas);
  if (grid > 0) c.grid_1d = grid;
  if (!prior.empty()) c.prior = prior;
  if (quantile > 0.0) c.quantile = quantile;
  c.validate();
  const LoggedDataset ds = load_data(data, c);
  if (ds.policy_count() != 1) {
    throw Error(ErrorCode::WrongPolicyCount, "eval expects one policy; use compare for two");
  }
  const ElEvaluator ev(ds);
  const MeleResult& m = ev.mele();
  const SubSupport region = sub_support(ev, Mode::Value, c.quantile);
  PosteriorSettings ps;
  ps.grid_points = c.grid_1d;
  ps.quantile = c.quantile;
  ps.threads = c.threads;
  const GridPosterior post = build_posterior(ev, Mode::Value, parse_prior(c.prior), region, ps);

  json summary = base_summary("eval", c);
  summary["n"] = ds.size();
  summary["policies"] = ds.policy_count();
  summary["mele_lo"] = vector_json(m.value_lo);
  summary["mele_hi"] = vector_json(m.value_hi);
  summary["is"] = vector_json(is_estimate(ds));
  summary["snis"] = vector_json(snis_estimate(ds));
  summary["sub_support"] = sub_support_json(region, c.quantile);
  for (double alpha : c.alphas) {
    summary[level_key("hpd", alpha)] = interval_json(hpd_interval(post, alpha));
    summary[level_key("wilks", alpha)] = interval_json(wilks_interval(ev, alpha).interval());
  }
  summary["diagnostics"] = diagnostics_json(m, post.diagnostics());
  write_summary(c, summary);
  write_posterior_csv(out_path(c, "posterior.csv"), post);
  write_svg_chart(out_path(c, "posterior.svg"), "Posterior density", "policy value", "density",
                  {density_series(post, "posterior")});
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_compare(const Globals& g, DataArgs data, const std::string& mode_text, const std::string& margins,
                bool relative, std::size_t grid, const std::string& prior, double quantile) {
  RunConfig c = resolve_config(g);
  if (!margins.empty()) c.margins = parse_number_list(margins);
  if (!prior.empty()) c.prior = prior;
  if (quantile > 0.0) c.quantile = quantile;
  Mode mode;
  if (mode_text == "joint") {
    mode = Mode::Value;
    if (grid > 0) c.grid_2d = grid;
  } else if (mode_text == "diff") {
    mode = Mode::Diff;
    if (relative) throw Error(ErrorCode::InvalidArgument, "--relative applies to joint mode only");
    if (grid > 0) c.grid_1d = grid;
  } else {
    throw Error(ErrorCode::InvalidArgument, "mode must be joint or diff");
  }
  c.validate();
  const LoggedDataset ds = load_data(data, c);
  if (ds.policy_count() != 2) throw Error(ErrorCode::WrongPolicyCount, "compare expects exactly two policies");
  const ElEvaluator ev(ds);
  const MeleResult& m = ev.mele();
  const SubSupport region = sub_support(ev, mode, c.quantile);
  PosteriorSettings ps;
  ps.grid_points = mode == Mode::Value ? c.grid_2d : c.grid_1d;
  ps.quantile = c.quantile;
  ps.threads = c.threads;
  const GridPosterior post = build_posterior(ev, mode, parse_prior(c.prior), region, ps);

  json probs = json::array();
  ChartSeries curve{mode == Mode::Diff ? "P(d > margin)" : (relative ? "relative" : "absolute"), {}, {}};
  for (double delta : c.margins) {
    double p = 0.0;
    std::string kind;
    if (mode == Mode::Diff) {
      p = prob_diff(post, delta);
      kind = "diff";
    } else if (relative) {
      p = prob_region(post, Relative{delta});
      kind = "relative";
    } else {
      p = prob_region(post, Absolute{delta});
      kind = "absolute";
    }
    probs.push_back({{"margin", delta}, {"kind", kind}, {"probability", p}});
    curve.x.push_back(delta);
    curve.y.push_back(p);
  }

  json summary = base_summary("compare", c);
  summary["n"] = ds.size();
  summary["policies"] = ds.policy_count();
  summary["mode"] = mode_text;
  summary["mele_lo"] = vector_json(m.value_lo);
  summary["mele_hi"] = vector_json(m.value_hi);
  summary["is"] = vector_json(is_estimate(ds));
  summary["snis"] = vector_json(snis_estimate(ds));
  summary["sub_support"] = sub_support_json(region, c.quantile);
  summary["probabilities"] = probs;
  summary["diagnostics"] = diagnostics_json(m, post.diagnostics());
  write_summary(c, summary);
  write_posterior_csv(out_path(c, "posterior.csv"), post);
  write_svg_chart(out_path(c, "probabilities.svg"), "Improvement probability", "margin", "probability", {curve});
  if (mode == Mode::Diff) {
    write_svg_chart(out_path(c, "posterior.svg"), "Posterior density of the difference", "difference",
                    "density", {density_series(post, "posterior")});
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_simulate(const Globals& g, std::size_t n, const std::string& policy_name, std::size_t train_n,
                 std::size_t mc) {
  RunConfig c = resolve_config(g);
  if (mc > 0) c.mc_samples = mc;
  c.validate();
  const BanditEnvironment& env = c.env;
  Policy policy = UniformPolicy{env.arms};
  json summary = base_summary("simulate", c);
  summary["policy"] = policy_name;
  if (policy_name == "oracle") {
    policy = OraclePolicy{env};
  } else if (policy_name == "uniform") {
    policy = UniformPolicy{env.arms};
  } else {
    PolicyRecipe recipe = recipe_by_name(policy_name, train_n > 0 ? train_n : 256);
    if (train_n > 0) recipe.train_n = train_n;
    policy = train_policy(env, recipe, derive_seed(c.seed, streams::kTraining));
    summary["train_n"] = recipe.train_n;
    summary["recipe"] = {{"m", recipe.m}, {"s", recipe.s}, {"k_prime", recipe.k_prime}};
  }
  const McEstimate truth = mc_true_value(policy, env, c.mc_samples, derive_seed(c.seed, streams::kMonteCarlo),
                                         c.threads);
  summary["true_value"] = truth.value;
  summary["true_value_se"] = truth.std_error;
  summary["mc_samples"] = truth.samples;
  summary["n"] = n;
  if (n > 0) {
    const auto log = generate_log(env, n, derive_seed(c.seed, streams::kEvaluation));
    const std::vector<Policy> policies{policy};
    const LoggedDataset ds = build_logged_dataset(log, policies, env);
    write_weighted_csv(out_path(c, "logged_weighted.csv"), ds);
    write_raw_csv(out_path(c, "logged_raw.csv"), log, logged_target_probs(log, policies));
    summary["is"] = vector_json(is_estimate(ds));
    summary["snis"] = vector_json(snis_estimate(ds));
    summary["bounds"] = json::array({json::array({0.0, static_cast<double>(env.arms)})});
    const ElEvaluator ev(ds);
    summary["mele_lo"] = vector_json(ev.mele().value_lo);
    summary["mele_hi"] = vector_json(ev.mele().value_hi);
  }
  write_summary(c, summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

void apply_overrides(RunConfig& c, std::size_t replicates, const std::string& sizes, std::size_t mc) {
  if (replicates > 0) c.replicates = replicates;
  if (!sizes.empty()) {
    std::vector<std::size_t> list;
    for (double s : parse_number_list(sizes)) {
      if (!(s >= 2.0) || s != std::floor(s)) throw Error(ErrorCode::InvalidArgument, "sizes must be integers >= 2");
      list.push_back(static_cast<std::size_t>(s));
    }
    c.sizes = list;
  }
  if (mc > 0) c.mc_samples = mc;
}

int run_coverage(const Globals& g, const std::string& preset, std::size_t replicates, const std::string& sizes,
                 const std::string& policies, std::size_t mc) {
  RunConfig c = resolve_config(g);
  apply_overrides(c, replicates, sizes, mc);
  if (!policies.empty()) {
    std::vector<std::string> names;
    std::stringstream in(policies);
    std::string item;
    while (std::getline(in, item, ',')) names.push_back(item);
    c.policies = names;
  }
  c.validate();
  CoverageConfig cc = coverage_preset(preset);
  cc.seed = c.seed;
  cc.threads = c.threads;
  cc.env = c.env;
  cc.grid_points = c.grid_1d;
  cc.quantile = c.quantile;
  cc.levels.clear();
  for (double a : c.alphas) cc.levels.push_back(1.0 - a);
  cc.redraw_policy = c.redraw_policy;
  if (c.replicates) cc.replicates = *c.replicates;
  if (c.sizes) cc.sizes = *c.sizes;
  if (c.policies) cc.policies = *c.policies;
  if (mc > 0 || !g.config.empty()) cc.mc_samples = c.mc_samples;

  const CoverageReport report = coverage_run(cc);
  write_coverage_csv(out_path(c, "coverage.csv"), report);

  std::vector<ChartSeries> curves;
  for (const std::string& p : cc.policies) {
    for (double level : cc.levels) {
      for (IntervalKind kind : {IntervalKind::Hpd, IntervalKind::Wilks}) {
        ChartSeries s{p + " " + to_string(kind) + " " + std::to_string(static_cast<int>(std::lround(100 * level))) + "%",
                      {},
                      {}};
        for (std::size_t n : cc.sizes) {
          if (const CoverageCell* cell = report.find(p, kind, level, n)) {
            s.x.push_back(std::log2(static_cast<double>(n)));
            s.y.push_back(cell->coverage);
          }
        }
        curves.push_back(s);
      }
    }
  }
  write_svg_chart(out_path(c, "coverage.svg"), "Coverage probability", "log2 sample size", "coverage", curves);

  json summary = base_summary("coverage", c);
  summary["preset"] = preset;
  summary["replicates"] = cc.replicates;
  summary["attempted"] = report.attempted;
  summary["failures"] = report.failures;
  json truths = json::object();
  for (const PolicyTruth& t : report.truths) truths[t.policy] = {{"value", t.value}, {"std_error", t.std_error}};
  summary["true_values"] = truths;
  json cells = json::array();
  for (const CoverageCell& cell : report.cells) {
    cells.push_back({{"policy", cell.policy},
                     {"interval", to_string(cell.kind)},
                     {"level", cell.level},
                     {"n", cell.n},
                     {"coverage", cell.coverage},
                     {"mc_error", cell.mc_error},
                     {"mean_width", cell.mean_width}});
  }
  summary["cells"] = cells;
  write_summary(c, summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_compare_experiment(const Globals& g, const std::string& preset, std::size_t replicates,
                           const std::string& sizes, const std::string& margins, std::size_t grid_2d,
                           std::size_t grid_1d, std::size_t mc) {
  RunConfig c = resolve_config(g);
  apply_overrides(c, replicates, sizes, mc);
  if (!margins.empty()) c.margins = parse_number_list(margins);
  if (grid_2d > 0) c.grid_2d = grid_2d;
  if (grid_1d > 0) c.grid_1d = grid_1d;
  c.validate();
  ComparisonConfig cc = comparison_preset(preset);
  cc.seed = c.seed;
  cc.threads = c.threads;
  cc.env = c.env;
  cc.margins = c.margins;
  cc.quantile = c.quantile;
  if (grid_2d > 0 || !g.config.empty() || preset == "full") cc.grid_points_2d = c.grid_2d;
  if (grid_1d > 0 || !g.config.empty() || preset == "full") cc.grid_points_1d = c.grid_1d;
  if (c.replicates) cc.replicates = *c.replicates;
  if (c.sizes) cc.sizes = *c.sizes;
  const ComparisonReport report = comparison_run(cc, mc);
  write_comparison_csv(out_path(c, "comparison.csv"), report);

  std::vector<ChartSeries> curves;
  for (std::size_t n : cc.sizes) {
    for (ComparisonMode mode : cc.modes) {
      ChartSeries s{std::string(to_string(mode)) + " n=" + std::to_string(n), {}, {}};
      for (double delta : cc.margins) {
        if (const ComparisonCell* cell = report.find(delta, mode, n)) {
          s.x.push_back(delta);
          s.y.push_back(cell->mean);
        }
      }
      curves.push_back(s);
    }
  }
  write_svg_chart(out_path(c, "comparison.svg"), "Improvement probability", "margin", "mean probability", curves);

  json summary = base_summary("compare-experiment", c);
  summary["preset"] = preset;
  summary["replicates"] = cc.replicates;
  summary["attempted"] = report.attempted;
  summary["failures"] = report.failures;
  summary["grid_2d"] = cc.grid_points_2d;
  summary["grid_1d"] = cc.grid_points_1d;
  json gaps = json::array();
  for (std::size_t n : cc.sizes) {
    for (double delta : cc.margins) {
      gaps.push_back({{"n", n}, {"margin", delta}, {"mean_abs_gap", report.mean_diff_gap(delta, n)}});
    }
  }
  summary["diff_vs_joint"] = gaps;
  json cells = json::array();
  for (const ComparisonCell& cell : report.cells) {
    cells.push_back({{"margin", cell.margin},
                     {"mode", to_string(cell.mode)},
                     {"n", cell.n},
                     {"mean", cell.mean},
                     {"band", json::array({cell.band_lo, cell.band_hi})}});
  }
  summary["cells"] = cells;
  write_summary(c, summary);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian empirical-likelihood inference for off-policy evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "master random seed");
  g.threads_opt = app.add_option("--threads", g.threads, "worker threads (fallback: EL_OPEVAL_THREADS)")
                      ->check(CLI::PositiveNumber);
  g.out_opt = app.add_option("--out", g.out, "output directory");
  app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);

  DataArgs eval_data;
  std::string eval_alpha;
  std::size_t eval_grid = 0;
  std::string eval_prior;
  double eval_quantile = 0.0;
  CLI::App* eval = app.add_subcommand("eval", "single-policy inference from logged data");
  eval->add_option("--data", eval_data.path, "input CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--format", eval_data.format, "weighted or raw")->check(CLI::IsMember({"weighted", "raw"}));
  eval->add_option("--bounds", eval_data.bounds, "weight bounds as lo:hi per policy");
  eval->add_option("--alpha", eval_alpha, "comma-separated alpha levels");
  eval->add_option("--grid", eval_grid, "posterior grid points");
  eval->add_option("--prior", eval_prior, "flat | beta:a,b | table:<csv>");
  eval->add_option("--quantile", eval_quantile, "sub-support quantile");

  DataArgs cmp_data;
  std::string cmp_mode = "joint";
  std::string cmp_margins;
  bool cmp_relative = false;
  std::size_t cmp_grid = 0;
  std::string cmp_prior;
  double cmp_quantile = 0.0;
  CLI::App* compare = app.add_subcommand("compare", "two-policy comparison from logged data");
  compare->add_option("--data", cmp_data.path, "input CSV")->required()->check(CLI::ExistingFile);
  compare->add_option("--format", cmp_data.format, "weighted or raw")->check(CLI::IsMember({"weighted", "raw"}));
  compare->add_option("--bounds", cmp_data.bounds, "weight bounds as lo:hi per policy");
  compare->add_option("--mode", cmp_mode, "joint or diff")->check(CLI::IsMember({"joint", "diff"}));
  compare->add_option("--margins", cmp_margins, "comma-separated margins");
  compare->add_flag("--relative", cmp_relative, "relative instead of absolute improvement");
  compare->add_option("--grid", cmp_grid, "grid points per axis");
  compare->add_option("--prior", cmp_prior, "flat | beta:a,b | table:<csv>");
  compare->add_option("--quantile", cmp_quantile, "sub-support quantile");

  std::size_t sim_n = 0;
  std::string sim_policy = "oracle";
  std::size_t sim_train = 0;
  std::size_t sim_mc = 0;
  CLI::App* simulate = app.add_subcommand("simulate", "simulate logged data and Monte Carlo true values");
  simulate->add_option("--n", sim_n, "evaluation log size (0 skips the log)");
  simulate->add_option("--policy", sim_policy, "baseline | new | oracle | uniform | custom:m,s,kprime");
  simulate->add_option("--train-n", sim_train, "training log size for learned policies");
  simulate->add_option("--mc", sim_mc, "Monte Carlo contexts for the true value");

  std::string cov_preset = "quick";
  std::size_t cov_replicates = 0;
  std::string cov_sizes;
  std::string cov_policies;
  std::size_t cov_mc = 0;
  CLI::App* coverage = app.add_subcommand("coverage", "coverage and width study of HPD and Wilks intervals");
  coverage->add_option("--preset", cov_preset, "full | quick | undercoverage")
      ->check(CLI::IsMember({"full", "quick", "undercoverage"}));
  coverage->add_option("--replicates", cov_replicates, "replicates per size");
  coverage->add_option("--sizes", cov_sizes, "comma-separated sample sizes");
  coverage->add_option("--policies", cov_policies, "comma-separated policy recipes");
  coverage->add_option("--mc", cov_mc, "Monte Carlo contexts for true values");

  std::string ce_preset = "quick";
  std::size_t ce_replicates = 0;
  std::string ce_sizes;
  std::string ce_margins;
  std::size_t ce_grid2 = 0;
  std::size_t ce_grid1 = 0;
  std::size_t ce_mc = 0;
  CLI::App* cexp = app.add_subcommand("compare-experiment", "joint versus difference comparison study");
  cexp->add_option("--preset", ce_preset, "full | quick")->check(CLI::IsMember({"full", "quick"}));
  cexp->add_option("--replicates", ce_replicates, "replicates per size");
  cexp->add_option("--sizes", ce_sizes, "comma-separated sample sizes");
  cexp->add_option("--margins", ce_margins, "comma-separated margins");
  cexp->add_option("--grid2d", ce_grid2, "joint grid points per axis");
  cexp->add_option("--grid1d", ce_grid1, "difference grid points");
  cexp->add_option("--mc", ce_mc, "Monte Carlo contexts for true values (0 skips)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval) return run_eval(g, eval_data, eval_alpha, eval_grid, eval_prior, eval_quantile);
    if (*compare) {
      return run_compare(g, cmp_data, cmp_mode, cmp_margins, cmp_relative, cmp_grid, cmp_prior, cmp_quantile);
    }
    if (*simulate) return run_simulate(g, sim_n, sim_policy, sim_train, sim_mc);
    if (*coverage) return run_coverage(g, cov_preset, cov_replicates, cov_sizes, cov_policies, cov_mc);
    if (*cexp) {
      return run_compare_experiment(g, ce_preset, ce_replicates, ce_sizes, ce_margins, ce_grid2, ce_grid1, ce_mc);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
