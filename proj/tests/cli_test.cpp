// Copyright 2026 The qpecf Authors
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
#include "qpecf/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "qpecf/pmf_model.hpp"

namespace qpecf {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "qpecf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("qpecf_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  std::filesystem::path dir_;
};

TEST(CliPmf, RepresentablePhase) {
  const auto r = run({"pmf", "--n", "3", "--theta", "0.375"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[0], "y,probability");
  EXPECT_EQ(rows[4], "3,1.0");
  EXPECT_EQ(rows[1], "0,0.0");
}

TEST(CliPmf, FractionMatchesLibrary) {
  const auto r = run({"pmf", "--n", "3", "--theta", "1/3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  for (int y = 0; y < 8; ++y) {
    const double p = std::stod(rows[y + 1].substr(rows[y + 1].find(',') + 1));
    EXPECT_NEAR(p, pmf_single(RegisterSpec(3), 1.0 / 3, y), 1e-12);
  }
}

TEST(CliPmf, Mixture) {
  const auto r = run({"pmf", "--n", "3", "--component", "1/3:0.5", "--component", "1/2:0.5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const PhaseModel model({{1.0 / 3, 0.5}, {0.5, 0.5}});
  const auto rows = lines(r.out);
  for (int y = 0; y < 8; ++y) {
    const double p = std::stod(rows[y + 1].substr(rows[y + 1].find(',') + 1));
    EXPECT_NEAR(p, pmf_multi(RegisterSpec(3), model, y), 1e-12);
  }
}

TEST(CliPmf, UsageErrors) {
  EXPECT_EQ(run({"pmf", "--n", "3", "--theta", "1.5"}).code, kExitUsage);
  EXPECT_EQ(run({"pmf", "--n", "3", "--theta", "abc"}).code, kExitUsage);
  EXPECT_EQ(run({"pmf", "--n", "3"}).code, kExitUsage);
  EXPECT_EQ(run({"pmf", "--n", "3", "--theta", "0.1", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"pmf", "--n", "0", "--theta", "0.1"}).code, kExitUsage);
  EXPECT_EQ(run({}).code, kExitUsage);
}

TEST(CliSimulate, CountsSumToShotsAndAreReproducible) {
  const std::vector<std::string> args{"simulate", "--n", "3", "--theta", "1/3",
                                      "--shots", "1000000", "--seed", "42"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto doc = nlohmann::json::parse(a.out);
  std::uint64_t total = 0;
  for (const auto& c : doc["counts"]) total += c.get<std::uint64_t>();
  EXPECT_EQ(total, 1000000u);
  EXPECT_EQ(run({"simulate", "--n", "3", "--theta", "1/3", "--shots", "0"}).code, kExitUsage);
}

TEST_F(CliFiles, FitSimulatedHistogram) {
  ASSERT_EQ(run({"simulate", "--n", "3", "--theta", "1/3", "--shots", "1000000", "--seed", "42",
                 "-o", path("h.json")})
                .code,
            kExitOk);
  const auto r = run({"fit", "-i", path("h.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_LT(std::abs(doc["phases"][0].get<double>() - 1.0 / 3), 1.5e-4);
  EXPECT_TRUE(doc["converged"].get<bool>());
}

TEST_F(CliFiles, FitIndicatorAndProbabilityInputs) {
  write("ind.json", R"({"n":3,"shots":50,"counts":[0,0,0,0,0,50,0,0]})");
  auto r = run({"fit", "-i", path("ind.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out)["phases"][0].get<double>(), 5.0 / 8, 1e-9);

  write("probs.json", R"([0.0, 0.0, 1.0, 0.0])");
  r = run({"fit", "-i", path("probs.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out)["phases"][0].get<double>(), 0.5, 1e-9);
}

TEST_F(CliFiles, FitTwoPhases) {
  ASSERT_EQ(run({"simulate", "--n", "3", "--component", "1/3:0.5", "--component", "1/2:0.5",
                 "--shots", "1000000", "--seed", "42", "-o", path("h.json")})
                .code,
            kExitOk);
  const auto r = run({"fit", "-i", path("h.json"), "--phases", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_LT(std::abs(doc["phases"][0].get<double>() - 1.0 / 3), 1e-3);
  EXPECT_LT(std::abs(doc["phases"][1].get<double>() - 0.5), 1e-2);
}

TEST_F(CliFiles, FitRejectsBadInput) {
  write("bad.json", R"({"n":3,"shots":5,"counts":[1,2]})");
  EXPECT_EQ(run({"fit", "-i", path("bad.json")}).code, kExitUsage);
  write("broken.json", "{\"n\":3,\n\"shots\":");
  const auto r = run({"fit", "-i", path("broken.json")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("broken.json"), std::string::npos) << r.err;
  EXPECT_EQ(run({"fit", "-i", path("missing.json")}).code, kExitUsage);
  write("ind.json", R"({"n":2,"shots":4,"counts":[0,4,0,0]})");
  EXPECT_EQ(run({"fit", "-i", path("ind.json"), "--phases", "2"}).code, kExitUsage);
}

TEST(CliFisher, MatchesTabulatedValues) {
  const auto r = run({"fisher", "--n-min", "1", "--n-max", "8"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[0], "n,M,fisher_information,crlb_rmse");
  EXPECT_EQ(rows[1].substr(0, 4), "1,2,");
  EXPECT_EQ(rows[3], "3,8,829.04676969,0.0347304559021");
  const double table[] = {197.39208802,    829.04676969,    3355.66549637,  13462.14040308,
                          53888.04002995,  215591.6385373,  862406.03256634};
  for (int n = 2; n <= 8; ++n) {
    std::istringstream row(rows[n]);
    std::string cell;
    for (int c = 0; c < 3; ++c) std::getline(row, cell, ',');
    EXPECT_NEAR(std::stod(cell) / table[n - 2], 1.0, 1e-8) << rows[n];
  }
  EXPECT_EQ(run({"fisher", "--n-min", "5", "--n-max", "4"}).code, kExitUsage);
}

TEST_F(CliFiles, BenchIsThreadIndependent) {
  write("grid.json",
        R"({"phases":["1/3","1/5"],"n_values":[2,3,4],"shot_values":[100,1000,10000],"trials":10,"base_seed":42})");
  const auto a = run({"bench", "-c", path("grid.json"), "-o", path("a.csv"), "--threads", "1",
                      "--summary", path("a.json"), "--pooled", path("ap.csv")});
  const auto b = run({"bench", "-c", path("grid.json"), "-o", path("b.csv"), "--threads", "8",
                      "--summary", path("b.json"), "--pooled", path("bp.csv")});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ASSERT_EQ(b.code, kExitOk) << b.err;
  auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(slurp(path("ap.csv")), slurp(path("bp.csv")));
  EXPECT_EQ(lines(slurp(path("a.csv"))).size(), 19u);
}

TEST_F(CliFiles, BenchMalformedConfig) {
  write("bad.json", R"({"phases":[0.2],"n_values":[3],"shot_values":[10],"trials":"x","base_seed":1})");
  auto r = run({"bench", "-c", path("bad.json")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("trials"), std::string::npos) << r.err;
  write("syntax.json", "{\n\"phases\": [0.2,\n}");
  r = run({"bench", "-c", path("syntax.json")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find(":3"), std::string::npos) << r.err;
  EXPECT_EQ(run({"bench", "-c", path("bad.json"), "--threads", "0"}).code, kExitUsage);
}

}  // namespace
}  // namespace qpecf
