#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "elbandit/config.hpp"
#include "elbandit/io.hpp"
#include "test_helpers.hpp"

using namespace elbandit;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("elbandit_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) const {
    const std::string path = (dir_ / name).string();
    std::ofstream(path) << text;
    return path;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

using WeightedCsv = TempDir;
using RawCsv = TempDir;
using Writers = TempDir;
using Config = TempDir;

TEST_F(WeightedCsv, TrivialFile) {
  const LoggedDataset ds = ingest_weighted_csv(write("w.csv", "reward,w_1\n1,1\n0,1\n"), {{1.0, 1.0}});
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.rewards()(0), 1.0);
  EXPECT_EQ(ds.weights()(1, 0), 1.0);
}

TEST_F(WeightedCsv, MalformedNumberReportsPosition) {
  expect_error([&] { ingest_weighted_csv(write("w.csv", "reward,w_1\n1,1\n0,abc\n"), {{0.0, 2.0}}); },
               ErrorCode::ParseError, "line 3, column 2");
}

TEST_F(WeightedCsv, StructuralErrors) {
  expect_error([&] { ingest_weighted_csv(write("a.csv", "reward,w_1,w_2\n1,1,1\n0,1,1\n"), {{0.0, 2.0}}); },
               ErrorCode::ConfigMismatch);
  expect_error([&] { ingest_weighted_csv(write("b.csv", "r,w_1\n1,1\n0,1\n"), {{0.0, 2.0}}); },
               ErrorCode::ParseError, "header");
  expect_error([&] { ingest_weighted_csv(write("c.csv", "reward,w_1\n1,1\n0\n"), {{0.0, 2.0}}); },
               ErrorCode::ParseError, "line 3");
  expect_error([&] { ingest_weighted_csv(write("d.csv", ""), {{0.0, 2.0}}); }, ErrorCode::ParseError);
  expect_error([&] { ingest_weighted_csv(path("missing.csv"), {{0.0, 2.0}}); }, ErrorCode::IoError);
  expect_error([&] { ingest_weighted_csv(write("e.csv", "reward,w_1\n1,3\n0,1\n"), {{0.0, 2.0}}); },
               ErrorCode::WeightOutsideSupport, "row 1, column 1");
}

TEST_F(RawCsv, WeightsAreRatios) {
  const LoggedDataset ds = ingest_raw_csv(
      write("r.csv", "action,reward,behavior_prob,target_prob_1,target_prob_2\n1,1,0.5,1.0,0.5\n2,0,0.5,0,1\n"));
  EXPECT_EQ(ds.policy_count(), 2u);
  EXPECT_DOUBLE_EQ(ds.weights()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(ds.weights()(0, 1), 1.0);
  EXPECT_EQ(ds.support().upper(0), 2.0);
}

TEST_F(RawCsv, RejectsInvalidProbabilities) {
  expect_error([&] { ingest_raw_csv(write("a.csv", "action,reward,behavior_prob,target_prob_1\n1,1,0,1\n1,0,0.5,1\n")); },
               ErrorCode::InvalidArgument, "line 2");
  expect_error([&] { ingest_raw_csv(write("b.csv", "action,reward,behavior_prob,target_prob_1\n1,1,0.5,1\n1,0,0.5,1.2\n")); },
               ErrorCode::InvalidArgument, "line 3");
  expect_error([&] {
    ingest_raw_csv(write("c.csv", "action,reward,behavior_prob,target_prob_1\n1,1,0.5,1\n1,0,0.5,1\n"),
                   {{0.0, 2.0}, {0.0, 2.0}});
  }, ErrorCode::ConfigMismatch);
}

TEST_F(RawCsv, SimulatedLogRoundTrips) {
  const BanditEnvironment env;
  const auto log = generate_log(env, 200, 11);
  const LearnedPolicy policy = train_policy(env, baseline_recipe(), 12);
  const std::vector<Policy> policies{policy, OraclePolicy{env}};
  const Matrix probs = logged_target_probs(log, policies);
  const LoggedDataset direct = build_logged_dataset(log, policies, env);
  write_raw_csv(path("raw.csv"), log, probs);
  write_weighted_csv(path("weighted.csv"), direct);
  const std::vector<std::pair<double, double>> box{{0.0, 10.0}, {0.0, 10.0}};
  const LoggedDataset from_raw = ingest_raw_csv(path("raw.csv"), box);
  const LoggedDataset from_weighted = ingest_weighted_csv(path("weighted.csv"), box);
  ASSERT_EQ(from_raw.size(), direct.size());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(direct.size()); ++i) {
    EXPECT_EQ(from_raw.rewards()(i), direct.rewards()(i));
    EXPECT_EQ(from_weighted.rewards()(i), direct.rewards()(i));
    for (Eigen::Index j = 0; j < 2; ++j) {
      EXPECT_NEAR(from_raw.weights()(i, j), direct.weights()(i, j), 1e-12);
      EXPECT_EQ(from_weighted.weights()(i, j), direct.weights()(i, j));
    }
  }
  std::ifstream in(path("raw.csv"));
  std::string header;
  std::getline(in, header);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.substr(0, first.find(',')), std::to_string(log[0].arm + 1));
}

TEST_F(Writers, PosteriorCsvHasOneRowPerCell) {
  const ElEvaluator ev(canonical());
  PosteriorSettings s;
  s.grid_points = 150;
  const GridPosterior post = build_posterior(ev, Mode::Value, PriorSpec::flat(), s);
  write_posterior_csv(path("out/sub/posterior.csv"), post);
  EXPECT_EQ(count_lines(path("out/sub/posterior.csv")), 151u);
}

TEST_F(Writers, SvgChartIsWellFormed) {
  write_svg_chart(path("c.svg"), "t <&>", "x", "y", {{"a", {0, 1, 2}, {0.1, 0.5, 0.2}}});
  std::ifstream in(path("c.svg"));
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text.rfind("<svg", 0), 0u);
  EXPECT_NE(text.find("t &lt;&amp;&gt;"), std::string::npos);
  EXPECT_NE(text.find("</svg>"), std::string::npos);
}

TEST(Formatting, RoundTripsDoubles) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(utc_timestamp().back(), 'Z');
}

TEST_F(Config, ParsesAndValidates) {
  const RunConfig c = parse_run_config(R"({"seed": 7, "grid_1d": 500, "margins": [0, 0.2],
                                           "env": {"K": 10, "d": 12, "beta0": 0, "beta1": 1},
                                           "bounds": [[0, 10]]})");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.grid_1d, 500u);
  EXPECT_EQ(c.margins, (std::vector<double>{0.0, 0.2}));
  ASSERT_EQ(c.bounds.size(), 1u);
  EXPECT_EQ(c.bounds[0].second, 10.0);
  const RunConfig again = parse_run_config(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
  expect_error([] { parse_run_config(R"({"sede": 7})"); }, ErrorCode::ParseError, "sede");
  expect_error([] { parse_run_config(R"({"env": {"arms": 3}})"); }, ErrorCode::ParseError, "arms");
  expect_error([] { parse_run_config("{"); }, ErrorCode::ParseError);
  expect_error([] { parse_run_config(R"({"grid_1d": 10})"); }, ErrorCode::InvalidArgument);
  expect_error([&] { load_run_config(path("none.json")); }, ErrorCode::IoError);
}

TEST_F(Config, ListsBoundsAndPriors) {
  EXPECT_EQ(parse_number_list("0,0.05, 0.1"), (std::vector<double>{0.0, 0.05, 0.1}));
  const auto b = parse_bounds("0:10,1:2");
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1].first, 1.0);
  expect_error([] { parse_bounds("0-10"); }, ErrorCode::ParseError);
  expect_error([] { parse_number_list("1,x"); }, ErrorCode::ParseError);
  EXPECT_EQ(parse_prior("flat").describe(), PriorSpec::flat().describe());
  EXPECT_NO_THROW(parse_prior("beta:2,3"));
  expect_error([] { parse_prior("beta:2"); }, ErrorCode::ParseError);
  expect_error([] { parse_prior("gamma"); }, ErrorCode::ParseError);
  const std::string table = write("prior.csv", "grid,density\n0,1\n0.5,2\n1,1\n");
  EXPECT_NO_THROW(parse_prior("table:" + table));
}
