// Copyright 2026 The Authors.
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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "portune/cli/app.hpp"

namespace portune {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("portune_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "portune");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  void generate(const std::string& name, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"generate", "--out", path(name), "--seed", "3", "--num-inputs", "8"};
    args.insert(args.end(), extra.begin(), extra.end());
    ASSERT_EQ(run(args), 0) << err_.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, IngestPrintsSummaryAndIsIdempotent) {
  write("data.csv",
        "device,m,n,k,params,runtime_ms\nA,1,1,1,1;2,3.0\nA,1,1,1,2;2,4.0\nA,2,1,1,1;2,1.0\nB,1,1,1,1;2,2.0\n");
  ASSERT_EQ(run({"ingest", "--dataset", path("data.csv"), "--out", path("a.json")}), 0) << err_.str();
  EXPECT_NE(out_.str().find("environments: 3, variants: 2"), std::string::npos) << out_.str();
  ASSERT_EQ(run({"ingest", "--dataset", path("a.json"), "--format", "canonical", "--out", path("b.json")}), 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(CliTest, IngestErrorsExitTwo) {
  EXPECT_EQ(run({"ingest", "--dataset", path("missing.csv")}), 2);
  write("bad.csv", "device,m,n,k,params,runtime_ms\nA,1,1,1,1;2,zero\n");
  EXPECT_EQ(run({"ingest", "--dataset", path("bad.csv")}), 2);
  EXPECT_NE(err_.str().find("line 2"), std::string::npos) << err_.str();
  write("empty.csv", "device,m,n,k,params,runtime_ms\n");
  EXPECT_EQ(run({"ingest", "--dataset", path("empty.csv")}), 2);
  write("db.json", R"({"sections": []})");
  EXPECT_EQ(run({"ingest", "--dataset", path("db.json"), "--format", "clblast"}), 2);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"tune"}), 1);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, TuneIsReproducibleWithoutTimestamps) {
  generate("syn.json");
  for (const char* sub : {"r1", "r2"}) {
    ASSERT_EQ(run({"tune", "--dataset", path("syn.json"), "--method", "stochastic", "--kappa", "2", "--seed", "5",
                   "--no-timestamp", "--out", path(sub)}),
              0)
        << err_.str();
  }
  for (const char* f : {"result.json", "job.json", "convergence.csv"}) {
    EXPECT_EQ(slurp(path(std::string("r1/") + f)), slurp(path(std::string("r2/") + f))) << f;
    EXPECT_FALSE(slurp(path(std::string("r1/") + f)).empty());
  }
  EXPECT_EQ(slurp(path("r1/convergence.csv")).substr(0, 40), "iteration,timestamp_ms,evaluations,best_");
}

TEST_F(CliTest, TuneErrorsExitThree) {
  generate("syn.json");
  EXPECT_EQ(run({"tune", "--dataset", path("syn.json"), "--kappa", "11", "--out", path("r")}), 3);
  EXPECT_EQ(run({"tune", "--dataset", path("syn.json"), "--devices", "nope", "--out", path("r")}), 3);
  EXPECT_EQ(run({"tune", "--dataset", path("syn.json"), "--method", "exhaustive", "--kappa", "5", "--cap", "10",
                 "--out", path("r")}),
            3);
  EXPECT_EQ(run({"tune", "--dataset", path("missing.json"), "--out", path("r")}), 2);
}

TEST_F(CliTest, EvaluatePipeline) {
  generate("syn.json");
  ASSERT_EQ(run({"tune", "--dataset", path("syn.json"), "--method", "exhaustive", "--kappa", "2", "--out", path("t")}),
            0)
      << err_.str();
  ASSERT_EQ(run({"evaluate", "report", "--dataset", path("syn.json"), "--result", path("t/result.json"), "--out",
                 path("rep")}),
            0)
      << err_.str();
  EXPECT_NE(out_.str().find("geomean: 1"), std::string::npos) << out_.str();
  EXPECT_TRUE(fs::exists(path("rep/report.json")));
  EXPECT_TRUE(fs::exists(path("rep/cdf.csv")));

  ASSERT_EQ(run({"evaluate", "sweep", "--dataset", path("syn.json"), "--method", "kmeans", "--kappa", "1..3", "--runs",
                 "4", "--out", path("sw"), "--workers", "2"}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(path("sw/sweep.csv")));
  EXPECT_TRUE(fs::exists(path("sw/cdf_kmeans_k3.csv")));

  ASSERT_EQ(run({"evaluate", "fleet", "--dataset", path("syn.json"), "--methods", "stochastic,tree", "--kappa", "2",
                 "--runs", "2", "--out", path("fl")}),
            0)
      << err_.str();
  const std::string fleet_csv = slurp(path("fl/fleet.csv"));
  EXPECT_NE(fleet_csv.find("per-device"), std::string::npos);

  ASSERT_EQ(run({"evaluate", "holdout", "--dataset", path("syn.json"), "--train-devices", "dev00", "--devices",
                 "dev01", "--unseen", "--runs", "2", "--kappa", "2", "--out", path("ho")}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(path("ho/holdout.json")));
}

TEST_F(CliTest, EvaluateErrorsExitFour) {
  generate("syn.json");
  EXPECT_EQ(run({"evaluate", "holdout", "--dataset", path("syn.json"), "--train-devices", "dev00", "--devices",
                 "dev00", "--unseen", "--runs", "1", "--out", path("ho")}),
            4);
  write("result.json", "{nope");
  EXPECT_EQ(run({"evaluate", "report", "--dataset", path("syn.json"), "--result", path("result.json"), "--out",
                 path("rep")}),
            4);
}

TEST(ParseKappas, Forms) {
  EXPECT_EQ(cli::parse_kappas("3"), (std::vector<std::size_t>{3}));
  EXPECT_EQ(cli::parse_kappas("1,2,4"), (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(cli::parse_kappas("2..5"), (std::vector<std::size_t>{2, 3, 4, 5}));
  EXPECT_THROW(cli::parse_kappas("x"), std::exception);
  EXPECT_THROW(cli::parse_kappas("5..2"), std::exception);
}

}  // namespace
}  // namespace portune
