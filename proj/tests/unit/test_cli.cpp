/**
 * Copyright 2026 The gpuperf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "test_support.hpp"

using gpuperf::cli::run;
using testing_support::data_dir;
using testing_support::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const char* kGemmParams = R"({"M":4096,"N":4096,"K":4096})";

}  // namespace

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    ASSERT_EQ(cli({"synth", "--kernel", "gemm", "--hw", "a100,a40", "-n", "90", "--seed", "3",
                   "--out", path("d.jsonl")})
                  .code,
              0);
    const std::vector<std::string> common = {"--dataset", path("d.jsonl"), "--seed", "1",
                                             "--epochs", "4", "--batch-size", "32"};
    auto mape = common;
    mape.insert(mape.begin(), "train");
    mape.insert(mape.end(), {"--out", path("gemm.est.json")});
    ASSERT_EQ(cli(mape).code, 0);
    auto p80 = mape;
    p80.back() = path("gemm.p80.json");
    p80.insert(p80.end(), {"--loss", "quantile", "--quantile", "0.8"});
    ASSERT_EQ(cli(p80).code, 0);
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::string path(const std::string& name) { return (*dir_ / name).string(); }

  static TempDir* dir_;
};
TempDir* CliPipeline::dir_ = nullptr;

TEST(Cli, NoArgumentsIsUsageError) {
  const auto r = cli({});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("gpuperf: error"), std::string::npos);
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(cli({"features", "--bogus"}).code, 1);
  EXPECT_EQ(cli({"nonsense"}).code, 1);
}

TEST(Cli, EverySubcommandHasHelp) {
  for (std::vector<std::string> cmd :
       {std::vector<std::string>{}, {"spec", "validate"}, {"spec", "list"}, {"features"}, {"synth"},
        {"train"}, {"evaluate"}, {"predict-kernel"}, {"gen-trace"}, {"predict-e2e"}, {"gap"}}) {
    const bool top = cmd.empty();
    cmd.push_back("--help");
    const auto r = cli(cmd);
    EXPECT_EQ(r.code, 0) << cmd.front();
    EXPECT_NE(r.out.find(top ? "predict-e2e" : "--json"), std::string::npos) << cmd.front();
  }
}

TEST(Cli, SpecValidate) {
  TempDir dir;
  auto j = nlohmann::json::parse(slurp(data_dir() / "hw" / "a100.json"));
  j.erase("compute_capability");
  std::ofstream(dir / "bad.json") << j.dump();
  const auto bad = cli({"spec", "validate", (dir / "bad.json").string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("compute_capability"), std::string::npos);
  const auto good = cli({"spec", "validate", (data_dir() / "hw" / "h100.json").string(), "--strict"});
  EXPECT_EQ(good.code, 0);
  EXPECT_NE(good.out.find("ok"), std::string::npos);
}

TEST(Cli, SpecList) {
  const auto r = cli({"spec", "list", "--json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out).size(), 11u);
}

TEST(Cli, FeaturesJson) {
  const auto r = cli({"features", "--hw", "a100", "--kernel", "gemm", "--params", kGemmParams, "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["features"].size(), 11u);
}

TEST(Cli, BadInputsAreDataErrors) {
  EXPECT_EQ(cli({"features", "--hw", "no-such-gpu", "--kernel", "gemm", "--params", kGemmParams}).code, 2);
  EXPECT_EQ(cli({"features", "--hw", "a100", "--kernel", "gemm", "--params", "{not json"}).code, 2);
  EXPECT_EQ(cli({"features", "--hw", "a100", "--kernel", "gemm", "--params", R"({"M":0,"N":1,"K":1})"}).code, 2);
  EXPECT_EQ(cli({"features", "--hw", "a100", "--kernel", "conv", "--params", kGemmParams}).code, 2);
  EXPECT_EQ(cli({"evaluate", "--model", "/nonexistent.json", "--dataset", "/nonexistent.jsonl"}).code, 2);
}

TEST(Cli, SynthIsDeterministic) {
  TempDir dir;
  for (const char* f : {"a.jsonl", "b.jsonl"}) {
    ASSERT_EQ(cli({"synth", "--kernel", "rmsnorm,silu_mul", "--hw", "h100", "-n", "20", "--seed", "5",
                   "--out", (dir / f).string()})
                  .code,
              0);
  }
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  EXPECT_EQ(lines(slurp(dir / "a.jsonl")), 40u);
}

TEST(Cli, GenTraceToy) {
  const auto model = (data_dir() / "models" / "toy.json").string();
  const auto tp1 = cli({"gen-trace", "--model-config", model, "--request", "128:0"});
  ASSERT_EQ(tp1.code, 0) << tp1.err;
  EXPECT_EQ(lines(tp1.out), 18u);
  const auto tp2 = cli({"gen-trace", "--model-config", model, "--request", "128:0", "--tp", "2"});
  EXPECT_EQ(lines(tp2.out), 22u);
  EXPECT_EQ(cli({"gen-trace", "--model-config", model, "--request", "128"}).code, 1);
}

TEST_F(CliPipeline, PredictKernelPrintsOneLatencyLine) {
  const auto r = cli({"predict-kernel", "--hw", "a100", "--kernel", "gemm", "--params", kGemmParams,
                      "--model", path("gemm.est.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out), 1u);
  EXPECT_EQ(r.out.rfind("latency_us ", 0), 0u);
  const auto f = cli({"predict-kernel", "--hw", "a100", "--kernel", "gemm", "--params", kGemmParams,
                      "--model", path("gemm.est.json"), "--features"});
  EXPECT_GT(lines(f.out), 11u);
}

TEST_F(CliPipeline, PredictKernelRejectsWrongCategory) {
  EXPECT_EQ(cli({"predict-kernel", "--hw", "a100", "--kernel", "rmsnorm", "--params",
                 R"({"seq":4,"dim":8})", "--model", path("gemm.est.json")})
                .code,
            2);
}

TEST_F(CliPipeline, EvaluateReportsPerHardware) {
  const auto r = cli({"evaluate", "--model", path("gemm.est.json"), "--dataset", path("d.jsonl"), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["per_hardware"].size(), 2u);
}

TEST_F(CliPipeline, GapTableAndCsv) {
  const auto r = cli({"gap", "--model", path("gemm.p80.json"), "--dataset", path("d.jsonl"),
                      "--csv", path("cdf.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("A100"), std::string::npos);
  EXPECT_NE(r.out.find("total underperforming"), std::string::npos);
  EXPECT_EQ(slurp(path("cdf.csv")).rfind("hardware,", 0), 0u);
  EXPECT_EQ(cli({"gap", "--model", path("gemm.est.json"), "--dataset", path("d.jsonl")}).code, 2);
}

TEST_F(CliPipeline, TrainingIsDeterministic) {
  ASSERT_EQ(cli({"train", "--dataset", path("d.jsonl"), "--seed", "1", "--epochs", "4",
                 "--batch-size", "32", "--out", path("again.json")})
                .code,
            0);
  EXPECT_EQ(slurp(path("again.json")), slurp(path("gemm.est.json")));
}

TEST_F(CliPipeline, PredictE2eNeedsEveryCategory) {
  const auto model = (data_dir() / "models" / "toy.json").string();
  const auto r = cli({"predict-e2e", "--model-config", model, "--request", "64:2", "--hw", "a100",
                      "--estimator", path("gemm.est.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no estimator"), std::string::npos);
}
