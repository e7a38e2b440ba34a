#ifndef ELBANDIT_CONFIG_HPP
#define ELBANDIT_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "elbandit/bandit.hpp"
#include "elbandit/posterior.hpp"

namespace elbandit {

/// Settings shared by every subcommand. Loaded from JSON, where unknown
/// keys are rejected; command-line flags override loaded values.
struct RunConfig {
  std::uint64_t seed = 20240601;
  std::size_t grid_1d = 10000;
  std::size_t grid_2d = 1000;
  std::vector<double> alphas{0.05, 0.10};
  double quantile = 0.9999;
  std::vector<double> margins{0.0, 0.05, 0.10};
  int threads = 1;
  std::string out = ".";
  std::string prior = "flat";
  BanditEnvironment env;
  std::vector<std::pair<double, double>> bounds;  // empty when not declared
  std::size_t mc_samples = 1000000;
  std::optional<std::size_t> replicates;
  std::optional<std::vector<std::size_t>> sizes;
  std::optional<std::vector<std::string>> policies;
  bool redraw_policy = false;

  void validate() const;
  std::string to_json() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// "flat", "beta:a,b" or "table:<csv with grid,density columns>".
PriorSpec parse_prior(const std::string& text);

/// Comma-separated numbers, e.g. "0,0.05,0.10".
std::vector<double> parse_number_list(const std::string& text);
/// Comma-separated "lo:hi" pairs, e.g. "0:10,0:10".
std::vector<std::pair<double, double>> parse_bounds(const std::string& text);

}  // namespace elbandit

#endif  // ELBANDIT_CONFIG_HPP
