// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <openssl/sha.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

std::string fixture(const std::string& name) { return std::string(CKPTOPT_FIXTURES) + "/" + name; }

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md);
  std::ostringstream s;
  for (unsigned char c : md) s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ckptopt_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out(const std::string& name) const { return (dir_ / name).string(); }

  static std::string inst(const std::string& stem) {
    return " --graph " + fixture(stem + ".graph.json") + " --catalog " + fixture(stem + ".catalog.json");
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(CKPTOPT_CLI) + " " + args + " > " + out("stdout.txt") + " 2> " + out("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST_F(Cli, SolveWritesScheduleManifestAndTelemetry) {
  const std::string sched = out("c3.json");
  ASSERT_EQ(run("solve" + inst("chain3") + " --budget 100 --out " + sched), 0);
  EXPECT_TRUE(fs::exists(sched));
  EXPECT_FALSE(read(sched + ".telemetry.jsonl").empty());
  auto m = nlohmann::json::parse(read(sched + ".manifest.json"));
  EXPECT_EQ(m["command"], "solve");
  ASSERT_EQ(m["inputs"].size(), 2u);
  for (const auto& in : m["inputs"]) EXPECT_EQ(in["sha256"], sha256_hex(read(in["path"].get<std::string>())));
}

TEST_F(Cli, SolveStatusExitCodes) {
  EXPECT_EQ(run("solve" + inst("chain3") + " --budget 0 --out " + out("s.json")), 3);
  EXPECT_EQ(run("solve" + inst("resnet_toy") + " --budget 19MiB --node-limit 1 --out " + out("s.json")), 4);
  EXPECT_EQ(run("solve" + inst("chain3") + " --budget lots --out " + out("s.json")), 1);
  EXPECT_EQ(run("solve --graph /nonexistent.json --catalog /nonexistent.json --budget 1 --out " + out("s.json")), 1);
}

TEST_F(Cli, TightResnetBudgetReportsGap) {
  ASSERT_EQ(run("solve" + inst("resnet_toy") + " --budget 20MiB --time-limit 10 --out " + out("r.json")), 2);
  EXPECT_NE(read(out("stdout.txt")).find("gap"), std::string::npos);
}

TEST_F(Cli, SimulateValidAndInvalidSchedules) {
  const std::string sched = fixture("golden/residual8_b9.schedule.json");
  ASSERT_EQ(run("simulate" + inst("residual8") + " --schedule " + sched + " --budget 9 --trace " + out("t.csv")), 0);
  EXPECT_EQ(read(out("t.csv")), read(fixture("golden/residual8_b9.trace.csv")));
  EXPECT_EQ(run("simulate" + inst("residual8") + " --schedule " + sched + " --budget 8 --trace " + out("t.csv")), 6);

  ASSERT_EQ(run("solve" + inst("chain3") + " --budget 100 --out " + out("c3.json")), 0);
  auto doc = nlohmann::json::parse(read(out("c3.json")));
  doc["stages"][0]["store"] = "010";
  doc["stages"][1]["store"] = "000";
  std::ofstream(out("bad.json")) << doc.dump(2);
  EXPECT_EQ(run("simulate" + inst("chain3") + " --schedule " + out("bad.json") + " --trace " + out("t.csv")), 5);
  EXPECT_NE(read(out("stderr.txt")).find("Eq8: node k=2 dep x1 unavailable"), std::string::npos)
      << read(out("stderr.txt"));
}

TEST_F(Cli, SweepAndEmptyBudgetList) {
  ASSERT_EQ(run("sweep" + inst("chain16") + " --budgets 9,12,16 --ablation-grid none,all --out " + out("s.csv")), 0);
  const std::string csv = read(out("s.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6);
  EXPECT_TRUE(fs::exists(out("s.csv") + ".manifest.json"));
  EXPECT_EQ(run("sweep" + inst("chain16") + " --budgets '' --out " + out("s.csv")), 1);
}

TEST_F(Cli, ExportLpIsReproducible) {
  ASSERT_EQ(run("export-lp" + inst("residual8") + " --inplace --budget 12 --out " + out("a.lp") + " --stats " + out("a.json")), 0);
  ASSERT_EQ(run("export-lp" + inst("residual8") + " --inplace --budget 12 --out " + out("b.lp")), 0);
  EXPECT_EQ(read(out("a.lp")), read(out("b.lp")));
  EXPECT_EQ(nlohmann::json::parse(read(out("a.json"))),
            nlohmann::json::parse(read(fixture("golden/residual8_stats.json"))));
}

TEST_F(Cli, OracleCrossCheck) {
  ASSERT_EQ(run("gen --kind chain --n 4 --variants 2 --graph-out " + out("g.json") + " --catalog-out " + out("c.json")), 0);
  EXPECT_EQ(run("oracle --graph " + out("g.json") + " --catalog " + out("c.json") + " --budgets 4,6,100 --out " +
                out("o.json")),
            0);
  EXPECT_TRUE(fs::exists(out("o.json")));
}

TEST_F(Cli, GenMatchesFixtureBytes) {
  ASSERT_EQ(run("gen --kind chain --n 4 --seed 0 --graph-out " + out("g.json") + " --catalog-out " + out("c.json")), 0);
  EXPECT_EQ(read(out("g.json")), read(fixture("chain4.graph.json")));
  EXPECT_EQ(read(out("c.json")), read(fixture("chain4.catalog.json")));
}

TEST_F(Cli, UnknownSubcommandIsBadInput) { EXPECT_EQ(run("frobnicate"), 1); }

}  // namespace
