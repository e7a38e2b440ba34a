#include "elbandit/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace elbandit {

namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : object.items()) {
    if (known.count(item.key()) == 0) {
      throw Error(ErrorCode::ParseError, "unknown configuration key '" + where + item.key() + "'");
    }
  }
}

template <class T>
T get_as(const json& object, const std::string& key) {
  try {
    return object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "configuration key '" + key + "': " + e.what());
  }
}

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorCode::ParseError, "malformed number '" + text + "' in " + what);
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? std::string() : item.substr(first, last - first + 1));
  }
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) out.push_back(parse_double(item, "number list"));
  return out;
}

std::vector<std::pair<double, double>> parse_bounds(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  for (const std::string& item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw Error(ErrorCode::ParseError, "bounds must be written lo:hi, got '" + item + "'");
    out.emplace_back(parse_double(parts[0], "bounds"), parse_double(parts[1], "bounds"));
  }
  return out;
}

PriorSpec parse_prior(const std::string& text) {
  if (text == "flat") return PriorSpec::flat();
  if (text.rfind("beta:", 0) == 0) {
    const std::vector<double> p = parse_number_list(text.substr(5));
    if (p.empty() || p.size() % 2 != 0) {
      throw Error(ErrorCode::ParseError, "Beta prior must be written beta:a,b[,a2,b2]");
    }
    std::vector<std::pair<double, double>> params;
    for (std::size_t k = 0; k < p.size(); k += 2) params.emplace_back(p[k], p[k + 1]);
    return PriorSpec::beta_product(std::move(params));
  }
  if (text.rfind("table:", 0) == 0) {
    const std::string path = text.substr(6);
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open prior table '" + path + "'");
    std::string line;
    std::vector<double> grid;
    std::vector<double> values;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line_no == 1 || line.empty()) continue;
      const auto cells = split(line, ',');
      if (cells.size() != 2) {
        throw Error(ErrorCode::ParseError, path + ": line " + std::to_string(line_no) + ": expected grid,density");
      }
      grid.push_back(parse_double(cells[0], path + " line " + std::to_string(line_no) + " column 1"));
      values.push_back(parse_double(cells[1], path + " line " + std::to_string(line_no) + " column 2"));
    }
    return PriorSpec::tabulated({Eigen::Map<Vector>(grid.data(), static_cast<Eigen::Index>(grid.size()))},
                                {Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()))});
  }
  throw Error(ErrorCode::ParseError, "unknown prior '" + text + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (grid_1d < 100 || grid_2d < 100) fail("grid sizes must be at least 100 per axis");
  if (alphas.empty()) fail("at least one alpha level is required");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) fail("alpha levels must lie in (0, 1)");
  }
  if (!(quantile > 0.0 && quantile < 1.0)) fail("quantile must lie in (0, 1)");
  for (double m : margins) {
    if (!std::isfinite(m)) fail("margins must be finite");
  }
  if (threads < 1) fail("threads must be at least 1");
  if (mc_samples < 1) fail("mc_samples must be positive");
  for (const auto& [lo, hi] : bounds) {
    if (!(lo >= 0.0 && lo <= hi) || !std::isfinite(hi)) fail("bounds must satisfy 0 <= lo <= hi < inf");
  }
  if (replicates && *replicates > 10000000) fail("replicates is implausibly large");
  if (sizes) {
    for (std::size_t n : *sizes) {
      if (n < 2) fail("sample sizes must be at least 2");
    }
  }
  env.validate();
  parse_prior(prior);
}

std::string RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["grid_1d"] = grid_1d;
  j["grid_2d"] = grid_2d;
  j["alphas"] = alphas;
  j["quantile"] = quantile;
  j["margins"] = margins;
  j["threads"] = threads;
  j["out"] = out;
  j["prior"] = prior;
  j["env"] = {{"K", env.arms}, {"d", env.context_dim}, {"beta0", env.beta0}, {"beta1", env.beta1}};
  json b = json::array();
  for (const auto& [lo, hi] : bounds) b.push_back({lo, hi});
  j["bounds"] = b;
  j["mc_samples"] = mc_samples;
  if (replicates) j["replicates"] = *replicates;
  if (sizes) j["sizes"] = *sizes;
  if (policies) j["policies"] = *policies;
  j["redraw_policy"] = redraw_policy;
  return j.dump();
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "configuration must be a JSON object");
  reject_unknown(j,
                 {"seed", "grid_1d", "grid_2d", "alphas", "quantile", "margins", "threads", "out", "prior", "env",
                  "bounds", "mc_samples", "replicates", "sizes", "policies", "redraw_policy"},
                 "");
  RunConfig c;
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("grid_1d")) c.grid_1d = get_as<std::size_t>(j, "grid_1d");
  if (j.contains("grid_2d")) c.grid_2d = get_as<std::size_t>(j, "grid_2d");
  if (j.contains("alphas")) c.alphas = get_as<std::vector<double>>(j, "alphas");
  if (j.contains("quantile")) c.quantile = get_as<double>(j, "quantile");
  if (j.contains("margins")) c.margins = get_as<std::vector<double>>(j, "margins");
  if (j.contains("threads")) c.threads = get_as<int>(j, "threads");
  if (j.contains("out")) c.out = get_as<std::string>(j, "out");
  if (j.contains("prior")) c.prior = get_as<std::string>(j, "prior");
  if (j.contains("env")) {
    const json& e = j.at("env");
    if (!e.is_object()) throw Error(ErrorCode::ParseError, "configuration key 'env' must be an object");
    reject_unknown(e, {"K", "d", "beta0", "beta1"}, "env.");
    if (e.contains("K")) c.env.arms = get_as<int>(e, "K");
    if (e.contains("d")) c.env.context_dim = get_as<int>(e, "d");
    if (e.contains("beta0")) c.env.beta0 = get_as<double>(e, "beta0");
    if (e.contains("beta1")) c.env.beta1 = get_as<double>(e, "beta1");
  }
  if (j.contains("bounds")) {
    for (const auto& pair : get_as<std::vector<std::vector<double>>>(j, "bounds")) {
      if (pair.size() != 2) throw Error(ErrorCode::ParseError, "each bounds entry must be [lo, hi]");
      c.bounds.emplace_back(pair[0], pair[1]);
    }
  }
  if (j.contains("mc_samples")) c.mc_samples = get_as<std::size_t>(j, "mc_samples");
  if (j.contains("replicates")) c.replicates = get_as<std::size_t>(j, "replicates");
  if (j.contains("sizes")) c.sizes = get_as<std::vector<std::size_t>>(j, "sizes");
  if (j.contains("policies")) c.policies = get_as<std::vector<std::string>>(j, "policies");
  if (j.contains("redraw_policy")) c.redraw_policy = get_as<bool>(j, "redraw_policy");
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open configuration file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

}  // namespace elbandit
