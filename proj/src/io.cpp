#include "elbandit/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "elbandit/dataset.hpp"

namespace elbandit {

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

CsvTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      for (const std::string& h : split_line(line)) table.header.push_back(trim(h));
      continue;
    }
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      std::ostringstream msg;
      msg << path << ": line " << line_no << ": expected " << table.header.size() << " columns, found "
          << cells.size();
      throw Error(ErrorCode::ParseError, msg.str());
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << path << ": line " << line_no << ", column " << c + 1 << ": malformed number '" << cell << "'";
        throw Error(ErrorCode::ParseError, msg.str());
      }
      row.push_back(value);
    }
    table.rows.push_back(std::move(row));
  }
  if (line_no == 0) throw Error(ErrorCode::ParseError, path + ": empty file");
  return table;
}

void expect_header(const std::string& path, const std::vector<std::string>& header,
                   const std::vector<std::string>& fixed, const std::string& repeated) {
  bool ok = header.size() > fixed.size();
  for (std::size_t k = 0; ok && k < fixed.size(); ++k) ok = header[k] == fixed[k];
  for (std::size_t k = fixed.size(); ok && k < header.size(); ++k) {
    ok = header[k] == repeated + std::to_string(k - fixed.size() + 1);
  }
  if (!ok) {
    std::string expected;
    for (const std::string& f : fixed) expected += f + ",";
    expected += repeated + "1,...";
    throw Error(ErrorCode::ParseError, path + ": line 1: header must be " + expected);
  }
}

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

LoggedDataset ingest_weighted_csv(const std::string& path, const std::vector<std::pair<double, double>>& bounds) {
  const CsvTable table = read_numeric_csv(path);
  expect_header(path, table.header, {"reward"}, "w_");
  const std::size_t l = table.header.size() - 1;
  if (bounds.size() != l) {
    std::ostringstream msg;
    msg << path << " has " << l << " weight column(s) but " << bounds.size() << " bound pair(s) were declared";
    throw Error(ErrorCode::ConfigMismatch, msg.str());
  }
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Matrix w(n, static_cast<Eigen::Index>(l));
  Vector r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    r(i) = row[0];
    for (std::size_t j = 0; j < l; ++j) w(i, static_cast<Eigen::Index>(j)) = row[j + 1];
  }
  return build_dataset(w, r, BoxSupport(bounds));
}

LoggedDataset ingest_raw_csv(const std::string& path, const std::vector<std::pair<double, double>>& bounds) {
  const CsvTable table = read_numeric_csv(path);
  expect_header(path, table.header, {"action", "reward", "behavior_prob"}, "target_prob_");
  const std::size_t l = table.header.size() - 3;
  if (!bounds.empty() && bounds.size() != l) {
    std::ostringstream msg;
    msg << path << " has " << l << " target policy column(s) but " << bounds.size() << " bound pair(s) were declared";
    throw Error(ErrorCode::ConfigMismatch, msg.str());
  }
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Matrix w(n, static_cast<Eigen::Index>(l));
  Vector r(n);
  double min_behavior = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const std::size_t line = static_cast<std::size_t>(i) + 2;
    const double behavior = row[2];
    if (!(behavior > 0.0 && behavior <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, path + ": line " + std::to_string(line) +
                                                  ": behavior_prob must lie in (0, 1], got " + format_double(behavior));
    }
    min_behavior = std::min(min_behavior, behavior);
    r(i) = row[1];
    for (std::size_t j = 0; j < l; ++j) {
      const double target = row[j + 3];
      if (!(target >= 0.0 && target <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, path + ": line " + std::to_string(line) + ": target_prob_" +
                                                    std::to_string(j + 1) + " must lie in [0, 1], got " +
                                                    format_double(target));
      }
      w(i, static_cast<Eigen::Index>(j)) = target / behavior;
    }
  }
  std::vector<std::pair<double, double>> box = bounds;
  if (box.empty()) box.assign(l, {0.0, 1.0 / min_behavior});
  return build_dataset(w, r, BoxSupport(box));
}

void write_weighted_csv(const std::string& path, const LoggedDataset& ds) {
  std::ofstream out = open_output(path);
  out << "reward";
  for (std::size_t j = 0; j < ds.policy_count(); ++j) out << ",w_" << j + 1;
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out << format_double(ds.rewards()(row));
    for (Eigen::Index j = 0; j < ds.weights().cols(); ++j) out << "," << format_double(ds.weights()(row, j));
    out << "\n";
  }
  finish(out, path);
}

void write_raw_csv(const std::string& path, const std::vector<RoundLog>& log, const Matrix& target_probs) {
  if (target_probs.rows() != static_cast<Eigen::Index>(log.size())) {
    throw Error(ErrorCode::DimensionMismatch, "target probabilities do not match the log length");
  }
  std::ofstream out = open_output(path);
  out << "action,reward,behavior_prob";
  for (Eigen::Index j = 0; j < target_probs.cols(); ++j) out << ",target_prob_" << j + 1;
  out << "\n";
  for (std::size_t i = 0; i < log.size(); ++i) {
    out << log[i].arm + 1 << "," << format_double(log[i].reward) << "," << format_double(log[i].behavior_prob);
    for (Eigen::Index j = 0; j < target_probs.cols(); ++j) {
      out << "," << format_double(target_probs(static_cast<Eigen::Index>(i), j));
    }
    out << "\n";
  }
  finish(out, path);
}

void write_posterior_csv(const std::string& path, const GridPosterior& post) {
  std::ofstream out = open_output(path);
  if (post.dims() == 1) {
    out << (post.mode() == Mode::Diff ? "d" : "v") << ",mass,log_density\n";
  } else {
    out << "v_1,v_2,mass,log_density\n";
  }
  for (std::size_t k = 0; k < post.size(); ++k) {
    const Vector c = post.center(k);
    for (Eigen::Index a = 0; a < c.size(); ++a) out << format_double(c(a)) << ",";
    const double ld = post.log_density()(static_cast<Eigen::Index>(k));
    out << format_double(post.cell_mass()(static_cast<Eigen::Index>(k))) << ","
        << (std::isfinite(ld) ? format_double(ld) : std::string("-inf")) << "\n";
  }
  finish(out, path);
}

void write_coverage_csv(const std::string& path, const CoverageReport& report) {
  std::ofstream out = open_output(path);
  out << "policy,interval,level,n,replicates,coverage,mc_error,mean_width,width_q05,width_q25,width_q50,width_q75,"
         "width_q95\n";
  for (const CoverageCell& c : report.cells) {
    out << c.policy << "," << to_string(c.kind) << "," << format_double(c.level) << "," << c.n << ","
        << c.replicates << "," << format_double(c.coverage) << "," << format_double(c.mc_error) << ","
        << format_double(c.mean_width);
    for (double q : c.width_quantiles) out << "," << format_double(q);
    out << "\n";
  }
  finish(out, path);
}

void write_comparison_csv(const std::string& path, const ComparisonReport& report) {
  std::ofstream out = open_output(path);
  out << "margin,mode,n,replicates,mean,band_lo,band_hi\n";
  for (const ComparisonCell& c : report.cells) {
    out << format_double(c.margin) << "," << to_string(c.mode) << "," << c.n << "," << c.replicates << ","
        << format_double(c.mean) << "," << format_double(c.band_lo) << "," << format_double(c.band_hi) << "\n";
  }
  finish(out, path);
}

void write_svg_chart(const std::string& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<ChartSeries>& series) {
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 420.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 160.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 60.0;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const ChartSeries& s : series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
      << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0;
    const double fy = y0 + (y1 - y0) * t / 4.0;
    svg << "<text x=\"" << px(fx) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << short_number(fx)
        << "</text>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">" << short_number(fy)
        << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
      << escape_xml(x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const ChartSeries& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      svg << short_number(px(s.x[i])) << "," << short_number(py(s.y[i])) << " ";
    }
    svg << "\"/>\n";
    const double ly = kTop + 14.0 + 16.0 * static_cast<double>(k);
    svg << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw + 30 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + pw + 35 << "\" y=\"" << ly << "\">" << escape_xml(s.name) << "</text>\n";
  }
  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out = open_output(path);
  out << text;
  finish(out, path);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace elbandit
