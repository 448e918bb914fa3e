// Copyright 2026 The collapse-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "collapse/report.hpp"
#include "collapse/workflows.hpp"
#include "support.hpp"

namespace collapse {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("collapse_lab_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const json& doc) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump();
    return p;
  }

  int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "collapse-lab");
    std::vector<char*> argv;
    for (std::string& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t end = text.find("\r\n", pos);
      EXPECT_NE(end, std::string::npos) << "record without CRLF terminator";
      if (end == std::string::npos) break;
      out.push_back(text.substr(pos, end - pos));
      pos = end + 2;
    }
    return out;
  }

  static std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
  }

  static json base(double lambda = 0.01) {
    return {{"K", 2}, {"d", 3}, {"counts", {8, 2}}, {"lambda_w", lambda}, {"lambda_h", lambda}};
  }

  fs::path dir_;
};

TEST_F(CliTest, PredictWritesGeometryThatRoundTrips) {
  const fs::path cfg = write_config("c.json", base());
  ASSERT_EQ(cli({"predict", "--config", cfg.string(), "--out", (dir_ / "out").string()}), kExitOk);
  const json doc = json::parse(slurp(dir_ / "out" / "geometry.json"));
  EXPECT_NEAR(doc["margin_constants"][0].get<double>(), 3.663562, 1e-6);
  EXPECT_NEAR(doc["margin_constants"][1].get<double>(), 2.944439, 1e-6);
  const ProblemSpec spec = testing::make_spec({8, 2}, 0.01, 0.01, 3);
  EXPECT_EQ(report::geometry_from_json(doc), closed_form_geometry(spec));
  EXPECT_FALSE(doc["collapse"]["minority_collapse"].get<bool>());

  const std::vector<std::string> rows = lines(slurp(dir_ / "out" / "grams.csv"));
  ASSERT_EQ(rows.size(), 1u + 4 + 4 + 4 + 4);
  EXPECT_EQ(rows[0], "gram,row,col,value");
  EXPECT_EQ(rows[1].substr(0, 8), "WWt,0,0,");
}

TEST_F(CliTest, PredictBalancedGramsFollowSimplexPattern) {
  json c = base();
  c["K"] = 4;
  c["d"] = 4;
  c["counts"] = {5, 5, 5, 5};
  ASSERT_EQ(cli({"predict", "--config", write_config("c.json", c).string(), "--out", dir_.string()}), kExitOk);
  double diag = 0.0, off = 0.0;
  for (const std::string& row : lines(slurp(dir_ / "grams.csv"))) {
    const auto f = fields(row);
    if (f[0] != "WWt") continue;
    const double v = std::stod(f[3]);
    if (f[1] == f[2]) {
      if (diag == 0.0) diag = v;
      EXPECT_NEAR(v, diag, 1e-12);
    } else {
      if (off == 0.0) off = v;
      EXPECT_NEAR(v, off, 1e-12);
    }
  }
  EXPECT_NEAR(off / diag, -1.0 / 3.0, 1e-12);
}

TEST_F(CliTest, PredictCompleteCollapseIsZero) {
  ASSERT_EQ(cli({"predict", "--config", write_config("c.json", base(0.3)).string(), "--out", dir_.string()}),
            kExitOk);
  const json doc = json::parse(slurp(dir_ / "geometry.json"));
  for (double v : doc["classifier"]["data"]) EXPECT_EQ(v, 0.0);
  for (double v : doc["class_means"]["data"]) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(doc["collapse"]["complete_collapse"].get<bool>());
}

TEST_F(CliTest, RejectsDimensionBelowClassCount) {
  json c = base();
  c["d"] = 1;
  EXPECT_EQ(cli({"predict", "--config", write_config("c.json", c).string(), "--out", dir_.string()}), kExitConfig);
}

TEST_F(CliTest, ConfigAndUsageErrors) {
  EXPECT_EQ(cli({"predict", "--config", (dir_ / "missing.json").string()}), kExitIo);
  EXPECT_EQ(cli({"bogus", "--config", "x"}), kExitConfig);
  EXPECT_EQ(cli({"predict"}), kExitConfig);
  json c = base();
  c.erase("lambda_w");
  EXPECT_EQ(cli({"predict", "--config", write_config("a.json", c).string(), "--out", dir_.string()}), kExitConfig);
  c = base();
  c["counts"] = {8, -2};
  EXPECT_EQ(cli({"predict", "--config", write_config("b.json", c).string(), "--out", dir_.string()}), kExitConfig);
  std::ofstream(dir_ / "bad.json") << "{not json";
  EXPECT_EQ(cli({"predict", "--config", (dir_ / "bad.json").string()}), kExitConfig);
}

TEST_F(CliTest, UnwritableOutputIsIoError) {
  std::ofstream(dir_ / "file") << "x";
  EXPECT_EQ(cli({"predict", "--config", write_config("c.json", base()).string(), "--out", (dir_ / "file" / "sub").string()}),
            kExitIo);
}

TEST_F(CliTest, SolveTrajectoryIsExactAndReproducible) {
  json c = base();
  c["solver"] = {{"max_iters", 8000}, {"log_interval", 1000}};
  const fs::path cfg = write_config("c.json", c);
  ASSERT_EQ(cli({"solve", "--config", cfg.string(), "--out", (dir_ / "a").string(), "--seeds", "2"}), kExitOk);
  ASSERT_EQ(cli({"solve", "--config", cfg.string(), "--out", (dir_ / "b").string(), "--seeds", "2"}), kExitOk);
  const std::string ta = slurp(dir_ / "a" / "trajectory.csv");
  EXPECT_EQ(ta, slurp(dir_ / "b" / "trajectory.csv"));
  const std::vector<std::string> rows = lines(ta);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0], "iter,loss,residual,nc1,nc2_w_h,nc2_wwt,nc2_hth,nc3_wh");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(fields(rows[i]).size(), 8u);
  const json fin = json::parse(slurp(dir_ / "a" / "final_state.json"));
  EXPECT_EQ(fin["status"], "converged");
  EXPECT_LT(std::abs(fin["loss_gap"].get<double>()), 1e-6);
  EXPECT_NEAR(fin["closed_form_loss"].get<double>(), 0.1332285, 1e-7);
}

TEST_F(CliTest, SolveWithSingleLogIntervalHasTwoRows) {
  json c = base();
  c["solver"] = {{"max_iters", 400}, {"log_interval", 400}};
  ASSERT_EQ(cli({"solve", "--config", write_config("c.json", c).string(), "--out", dir_.string(), "--seeds", "1"}),
            kExitOk);
  EXPECT_EQ(lines(slurp(dir_ / "trajectory.csv")).size(), 3u);
}

TEST_F(CliTest, SolveCompleteCollapseWritesUndef) {
  json c = base(0.3);
  c["solver"] = {{"max_iters", 5000}, {"log_interval", 5000}};
  ASSERT_EQ(cli({"solve", "--config", write_config("c.json", c).string(), "--out", dir_.string(), "--seeds", "1"}),
            kExitOk);
  const auto rows = lines(slurp(dir_ / "trajectory.csv"));
  const auto last = fields(rows.back());
  EXPECT_EQ(last[5], "undef");
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NE(last[i], "undef");
}

TEST_F(CliTest, SolveDivergenceExitsThree) {
  json c = base();
  c["solver"] = {{"max_iters", 200}, {"method", "projected-gradient"}, {"step_size", 1e4}};
  EXPECT_EQ(cli({"solve", "--config", write_config("c.json", c).string(), "--out", dir_.string(), "--seeds", "2"}),
            kExitDivergence);
  const json fin = json::parse(slurp(dir_ / "final_state.json"));
  EXPECT_EQ(fin["status"], "diverged");
}

TEST_F(CliTest, ThresholdsFlags) {
  struct Case {
    double lambda;
    bool minor, complete;
  };
  for (const Case& k : {Case{0.01, false, false}, Case{0.1, true, false}, Case{0.3, true, true}}) {
    const fs::path out = dir_ / std::to_string(k.lambda);
    ASSERT_EQ(cli({"thresholds", "--config", write_config("c.json", base(k.lambda)).string(), "--out", out.string()}),
              kExitOk);
    const json doc = json::parse(slurp(out / "collapse.json"));
    EXPECT_EQ(doc["collapsed"][1].get<bool>(), k.minor) << k.lambda;
    EXPECT_EQ(doc["complete_collapse"].get<bool>(), k.complete) << k.lambda;
    EXPECT_TRUE(doc["minority_ratio_bound"].is_number());
    EXPECT_TRUE(doc.contains("threshold"));
  }
}

TEST_F(CliTest, SeliLadderAndErrors) {
  json c = {{"counts", {4, 4, 1, 1}}, {"lambda_w", 0.01}, {"lambda_h", 0.01},
            {"lambda_ladder", {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}}};
  ASSERT_EQ(cli({"seli", "--config", write_config("c.json", c).string(), "--out", dir_.string()}), kExitOk);
  const json doc = json::parse(slurp(dir_ / "seli.json"));
  EXPECT_GT(doc["frobenius_gap_w"].get<double>(), 0.0);
  EXPECT_GT(doc["frobenius_gap_h"].get<double>(), 0.0);
  double prev = 1e300;
  ASSERT_EQ(doc["lambda_ladder"].size(), 5u);
  for (const json& row : doc["lambda_ladder"]) {
    const double r = row["m_ratio"].get<double>();
    EXPECT_LT(r, prev);
    EXPECT_GT(r, 1.0);
    prev = r;
  }
  c["counts"] = {4, 4, 4, 1};
  EXPECT_EQ(cli({"seli", "--config", write_config("d.json", c).string(), "--out", dir_.string()}), kExitConfig);
  c["counts"] = {3, 3, 3, 3};
  ASSERT_EQ(cli({"seli", "--config", write_config("e.json", c).string(), "--out", dir_.string()}), kExitOk);
  const json bal = json::parse(slurp(dir_ / "seli.json"));
  const Matrix lim = report::matrix_from_json(bal["gram_w_ours_limit"]);
  EXPECT_LT(linalg::frobenius_norm(lim - testing::unit_etf_gram(4)), 1e-12);
}

TEST_F(CliTest, SweepRowsMatchStandaloneSolves) {
  const json solver = {{"max_iters", 3000}, {"log_interval", 1000}};
  json c = {{"lambda_w", 0.005}, {"lambda_h", 0.005}, {"d", 3}, {"solver", solver},
            {"sweep", {{"ratios", {5, 10, 20, 50}}, {"K_A", 1}, {"K_B", 1}, {"n_B", 2}}}};
  ::setenv("COLLAPSE_LAB_THREADS", "2", 1);
  const int rc = cli({"sweep", "--config", write_config("c.json", c).string(), "--out", (dir_ / "sw").string(),
                      "--seeds", "2"});
  ::unsetenv("COLLAPSE_LAB_THREADS");
  ASSERT_EQ(rc, kExitOk);
  const auto rows = lines(slurp(dir_ / "sw" / "sweep.csv"));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], kSweepHeader);
  const auto header = fields(rows[0]);

  // R = 10 standalone.
  json s = {{"counts", {20, 2}}, {"d", 3}, {"lambda_w", 0.005}, {"lambda_h", 0.005}, {"solver", solver}};
  ASSERT_EQ(cli({"solve", "--config", write_config("s.json", s).string(), "--out", (dir_ / "solo").string(),
                 "--seeds", "2"}),
            kExitOk);
  EXPECT_EQ(slurp(dir_ / "solo" / "trajectory.csv"), slurp(dir_ / "sw" / "R_10" / "trajectory.csv"));
  const auto row = fields(rows[2]);
  const json fin = json::parse(slurp(dir_ / "solo" / "final_state.json"));
  EXPECT_EQ(row[0], "10");
  EXPECT_EQ(row[4], report::format_real(fin["loss"].get<double>()));
  EXPECT_EQ(row[7], report::format_real(fin["metrics"]["nc1"].get<double>()));

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields(rows[i]);
    ASSERT_EQ(f.size(), header.size());
    for (std::size_t j = 0; j < f.size(); ++j)
      if (f[j] == "undef") EXPECT_TRUE(header[j].rfind("nc", 0) == 0) << header[j];
  }
}

TEST_F(CliTest, SweepRejectsEmptyRatiosAndBadThreadCap) {
  json c = {{"lambda_w", 0.005}, {"lambda_h", 0.005}, {"sweep", {{"ratios", json::array()}}}};
  EXPECT_EQ(cli({"sweep", "--config", write_config("c.json", c).string(), "--out", dir_.string()}), kExitConfig);
  c.erase("sweep");
  EXPECT_EQ(cli({"sweep", "--config", write_config("d.json", c).string(), "--out", dir_.string()}), kExitConfig);
  EXPECT_EQ(sweep_thread_cap(nullptr), 0u);
  EXPECT_EQ(sweep_thread_cap("3"), 3u);
  EXPECT_THROW(sweep_thread_cap("0"), ConfigError);
  EXPECT_THROW(sweep_thread_cap("two"), ConfigError);
}

TEST(Report, CsvQuotingAndRealFormat) {
  EXPECT_EQ(report::csv_record({"a", "b,c", "d\"e"}), "a,\"b,c\",\"d\"\"e\"\r\n");
  EXPECT_EQ(report::format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(report::format_real(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(report::format_metric(std::nullopt), "undef");
}

TEST(Report, GeometryRoundTripOnRandomSpecs) {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 20; ++t) {
    const ClosedFormGeometry g = closed_form_geometry(testing::random_spec(rng));
    EXPECT_EQ(report::geometry_from_json(json::parse(report::to_json(g).dump())), g);
  }
}

}  // namespace
}  // namespace collapse
