// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <string>

#include <json.hpp>

#include "ckptopt/ckptopt.h"

namespace {

std::string fixture(const std::string& name) { return std::string(CKPTOPT_FIXTURES) + "/" + name; }

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  ckpt_string_free(s);
  return out;
}

ckpt_instance* load(const std::string& stem) {
  ckpt_instance* inst = nullptr;
  EXPECT_EQ(ckpt_instance_load(fixture(stem + ".graph.json").c_str(), fixture(stem + ".catalog.json").c_str(), &inst),
            CKPT_OK)
      << ckpt_last_error();
  return inst;
}

TEST(CApi, ParseBytes) {
  int64_t b = 0;
  EXPECT_EQ(ckpt_parse_bytes("1.5MiB", &b), CKPT_OK);
  EXPECT_EQ(b, 1572864);
  EXPECT_NE(ckpt_parse_bytes("1/2", &b), CKPT_OK);
  EXPECT_NE(std::string(ckpt_last_error()), "");
  EXPECT_EQ(ckpt_parse_bytes(nullptr, &b), CKPT_E_INVALID_ARGUMENT);
}

TEST(CApi, LoadErrors) {
  ckpt_instance* inst = nullptr;
  EXPECT_EQ(ckpt_instance_load("/nonexistent/g.json", "/nonexistent/c.json", &inst), CKPT_E_IO);
  EXPECT_EQ(inst, nullptr);
  EXPECT_EQ(ckpt_instance_parse("{", "{}", &inst), CKPT_E_PARSE);
  EXPECT_EQ(ckpt_instance_generate("chain", 4, 0, 0, 1, nullptr), CKPT_E_INVALID_ARGUMENT);
}

TEST(CApi, SolveSimulateRoundTrip) {
  ckpt_instance* inst = load("chain3");
  ckpt_options o;
  ckpt_options_init(&o);
  ckpt_result* r = nullptr;
  ASSERT_EQ(ckpt_solve(inst, 100, &o, &r), CKPT_OK);
  EXPECT_EQ(ckpt_result_status(r), CKPT_SOLVE_OPTIMAL);
  EXPECT_STREQ(ckpt_result_status_name(r), "optimal");
  ASSERT_TRUE(ckpt_result_has_schedule(r));
  char* sched = nullptr;
  ASSERT_EQ(ckpt_result_schedule(r, &sched), CKPT_OK);
  const std::string schedule = take(sched);
  char* summary = nullptr;
  ASSERT_EQ(ckpt_result_summary(r, &summary), CKPT_OK);
  EXPECT_NE(take(summary).find("\"optimal\""), std::string::npos);
  char* tele = nullptr;
  ASSERT_EQ(ckpt_result_telemetry(r, &tele), CKPT_OK);
  EXPECT_NE(take(tele).find("bound"), std::string::npos);
  ckpt_result_free(r);

  char* trace = nullptr;
  char* sim = nullptr;
  ASSERT_EQ(ckpt_simulate(inst, schedule.c_str(), &o, CKPT_TRACE_CSV, &trace, &sim, nullptr), CKPT_OK);
  EXPECT_NE(take(trace).find("total,,,3,,6"), std::string::npos);
  EXPECT_NE(take(sim).find("peak"), std::string::npos);
  ckpt_instance_free(inst);
}

TEST(CApi, SimulateReportsViolations) {
  ckpt_instance* inst = load("chain3");
  char* sched = nullptr;
  ASSERT_EQ(ckpt_store_everything(inst, nullptr, &sched), CKPT_OK);
  auto doc = nlohmann::json::parse(take(sched));
  doc["stages"][0]["store"] = "010";
  doc["stages"][1]["store"] = "000";
  const std::string s = doc.dump();
  char* violations = nullptr;
  EXPECT_EQ(ckpt_simulate(inst, s.c_str(), nullptr, CKPT_TRACE_CSV, nullptr, nullptr, &violations), CKPT_E_VALIDATION);
  EXPECT_EQ(take(violations), "Eq8: node k=2 dep x1 unavailable\n");
  ckpt_instance_free(inst);
}

TEST(CApi, GenerateMatchesFixture) {
  ckpt_instance* inst = nullptr;
  ASSERT_EQ(ckpt_instance_generate("chain", 16, 0, 2, 1, &inst), CKPT_OK);
  char* cat = nullptr;
  ASSERT_EQ(ckpt_instance_catalog_json(inst, &cat), CKPT_OK);
  ckpt_instance* ref = load("chain16v2");
  char* ref_cat = nullptr;
  ASSERT_EQ(ckpt_instance_catalog_json(ref, &ref_cat), CKPT_OK);
  EXPECT_EQ(take(cat), take(ref_cat));
  ckpt_instance_free(ref);
  ckpt_instance_free(inst);
}

TEST(CApi, ExportLpAndSweep) {
  ckpt_instance* inst = load("chain16");
  char* lp = nullptr;
  char* stats = nullptr;
  ASSERT_EQ(ckpt_export_lp(inst, 11, nullptr, &lp, &stats), CKPT_OK);
  EXPECT_NE(take(lp).find("Binaries"), std::string::npos);
  EXPECT_NE(take(stats).find("n_vars"), std::string::npos);
  const int64_t budgets[] = {11, 16};
  char* csv = nullptr;
  ASSERT_EQ(ckpt_sweep(inst, budgets, 2, "none,all", nullptr, &csv, nullptr), CKPT_OK);
  EXPECT_EQ(take(csv).substr(0, 7), "budget,");
  EXPECT_EQ(ckpt_sweep(inst, budgets, 0, "all", nullptr, &csv, nullptr), CKPT_E_INVALID_ARGUMENT);
  EXPECT_EQ(ckpt_sweep(inst, budgets, 1, "bogus", nullptr, &csv, nullptr), CKPT_E_INVALID_ARGUMENT);
  ckpt_instance_free(inst);
}

TEST(CApi, CrossCheckAndFaultInjection) {
  ckpt_instance* inst = nullptr;
  ASSERT_EQ(ckpt_instance_generate("chain", 4, 0, 1, 1, &inst), CKPT_OK);
  const int64_t budgets[] = {3, 4, 6};
  int pass = 0;
  char* report = nullptr;
  ASSERT_EQ(ckpt_oracle_cross_check(inst, budgets, 3, nullptr, 0, &pass, &report), CKPT_OK);
  take(report);
  EXPECT_EQ(pass, 1);
  ckpt_instance* big = load("residual8");
  EXPECT_EQ(ckpt_oracle_cross_check(big, budgets, 1, nullptr, 0, &pass, nullptr), CKPT_E_CAP_EXCEEDED);
  ckpt_instance_free(big);
  ckpt_instance_free(inst);
}

}  // namespace
