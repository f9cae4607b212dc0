/*
 * Copyright 2026 The sptc Authors
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

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "explorer.hpp"
#include "test_support.hpp"

namespace sptc::explorer {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sptc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

const char* kSmallConfig = R"({
  "seed": 5,
  "arch": {"workload": [
    {"name": "a", "c_out": 8, "c_in": 1, "kernel": 3, "n_vectors": 20, "sparse": false},
    {"name": "b", "c_out": 16, "c_in": 8, "kernel": 3, "n_vectors": 10, "sparse": true}]},
  "sweep": {"axes": [{"key": "layout.l_s_um", "values": [8, 9, 10]}]}
})";

TEST(Cli, ValidateEmptyFilePrintsDefaults) {
  const auto dir = testing::scratch_dir("cli_validate");
  const auto cfg = write_file(dir, "empty.json", "");
  const CliRun r = cli({"validate", cfg.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc.contains("device"));
  EXPECT_TRUE(doc.contains("layout"));
  EXPECT_EQ(doc.at("seed").get<int>(), 1);
}

TEST(Cli, NegativeGapNamesTheKey) {
  const auto dir = testing::scratch_dir("cli_lg");
  const auto cfg = write_file(dir, "bad.json", R"({"layout": {"l_g_um": -1}})");
  const CliRun r = cli({"validate", cfg.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("layout.l_g_um"), std::string::npos) << r.err;
  const CliRun r2 = cli({"--config", cfg.string(), "report", "--out", dir.string()});
  EXPECT_EQ(r2.code, kExitConfig);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitConfig);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(cli({"--format", "xml", "report"}).code, kExitConfig);
  EXPECT_EQ(cli({"validate"}).code, kExitConfig);
  EXPECT_EQ(cli({"validate", "/nonexistent/sptc.json"}).code, kExitConfig);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, MissingCheckpointIsRuntimeError) {
  const auto dir = testing::scratch_dir("cli_eval");
  const CliRun r = cli({"--out", dir.string(), "evaluate", (dir / "none.json").string()});
  EXPECT_NE(r.code, kExitOk);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, ReportAndSweepWriteFiles) {
  const auto dir = testing::scratch_dir("cli_sweep");
  const auto cfg = write_file(dir, "cfg.json", kSmallConfig);
  CliRun r = cli({"--config", cfg.string(), "--out", dir.string(), "sweep"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string csv = slurp(dir / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  r = cli({"--config", cfg.string(), "--out", dir.string(), "--format", "json", "report"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(doc.at("schema_version").get<int>(), kSchemaVersion);
}

TEST(Cli, OutputsAreByteIdentical) {
  const auto a = testing::scratch_dir("cli_det_a");
  const auto b = testing::scratch_dir("cli_det_b");
  const auto cfg = write_file(a, "cfg.json", kSmallConfig);
  const auto scen = write_file(a, "scen.json",
                               R"({"cases": [{"k1": 4, "k2": 4, "random_weights": true, "random_x": true, "trials": 2}]})");
  const std::vector<std::vector<std::string>> cmds = {
      {"sweep"}, {"report"}, {"--threads", "2", "sweep"}, {"nmae", "--vectors", "1", "--col-densities", "0.5"},
      {"simulate", scen.string()}};
  const std::vector<std::string> files = {"sweep.csv", "report.csv", "sweep.csv", "nmae.csv",
                                          "simulate.json"};
  std::string first_sweep;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    for (const auto& dir : {a, b}) {
      std::vector<std::string> args = {"--config", cfg.string(), "--out", dir.string()};
      args.insert(args.end(), cmds[i].begin(), cmds[i].end());
      const CliRun r = cli(args);
      ASSERT_EQ(r.code, kExitOk) << r.err;
    }
    const std::string x = slurp(a / files[i]);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b / files[i])) << files[i];
    if (i == 0) first_sweep = x;
    if (i == 2) {
      EXPECT_EQ(x, first_sweep);
    }
  }
}

TEST(Cli, SeedOverrideChangesStochasticOutput) {
  const auto dir = testing::scratch_dir("cli_seed");
  const auto scen = write_file(dir, "scen.json",
                               R"({"cases": [{"k1": 4, "k2": 4, "random_weights": true, "random_x": true}]})");
  ASSERT_EQ(cli({"--out", dir.string(), "--seed", "1", "simulate", scen.string()}).code, kExitOk);
  const std::string one = slurp(dir / "simulate.json");
  ASSERT_EQ(cli({"--out", dir.string(), "--seed", "2", "simulate", scen.string()}).code, kExitOk);
  EXPECT_NE(one, slurp(dir / "simulate.json"));
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = testing::cli_path();
  if (bin.empty()) GTEST_SKIP() << "sptc executable not built";
  const auto dir = testing::scratch_dir("cli_bin");
  const auto good = write_file(dir, "empty.json", "");
  const auto bad = write_file(dir, "bad.json", R"({"layout": {"l_g_um": -1}})");
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(bin + " validate " + good.string()), 0);
  EXPECT_EQ(status(bin + " validate " + bad.string()), 1);
  EXPECT_EQ(status(bin + " --out " + dir.string() + " evaluate " + (dir / "none.json").string()), 2);
}

}  // namespace
}  // namespace sptc::explorer
