#ifndef ELBANDIT_IO_HPP
#define ELBANDIT_IO_HPP

#include <string>
#include <utility>
#include <vector>

#include "elbandit/bandit.hpp"
#include "elbandit/experiments.hpp"
#include "elbandit/posterior.hpp"

namespace elbandit {

/// Decimal text with 17 significant digits.
std::string format_double(double x);

/// Header `reward,w_1,...,w_l`; bounds must list one pair per weight column.
LoggedDataset ingest_weighted_csv(const std::string& path, const std::vector<std::pair<double, double>>& bounds);

/// Header `action,reward,behavior_prob,target_prob_1,...`. Without declared
/// bounds each policy gets [0, 1 / min behavior_prob].
LoggedDataset ingest_raw_csv(const std::string& path, const std::vector<std::pair<double, double>>& bounds = {});

void write_weighted_csv(const std::string& path, const LoggedDataset& ds);

/// Raw export of a simulated log; arms are written one-based.
void write_raw_csv(const std::string& path, const std::vector<RoundLog>& log, const Matrix& target_probs);

/// One row per grid cell: centers, mass and log density.
void write_posterior_csv(const std::string& path, const GridPosterior& post);

void write_coverage_csv(const std::string& path, const CoverageReport& report);
void write_comparison_csv(const std::string& path, const ComparisonReport& report);

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal line chart with axes, tick labels and a legend.
void write_svg_chart(const std::string& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<ChartSeries>& series);

/// Writes text to a file, creating parent directories; throws IoError.
void write_text_file(const std::string& path, const std::string& text);

/// UTC time in ISO 8601.
std::string utc_timestamp();

}  // namespace elbandit

#endif  // ELBANDIT_IO_HPP
