// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "ckptopt/sweep.hpp"
#include "test_util.hpp"

namespace ckptopt {
namespace {

using testing::load_fixture;

TEST(Sweep, ChainObjectiveNonincreasingInBudget) {
  auto inst = load_fixture("chain16");
  SweepOptions o;
  o.budgets = {5, 7, 9, 12, 16};
  SweepResult r = sweep(inst.g, inst.c, o);
  ASSERT_EQ(r.cells.size(), 5u);
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    ASSERT_EQ(r.cells[i].status, SolveStatus::kOptimal);
    ASSERT_TRUE(r.cells[i].simulated_peak.has_value());
    EXPECT_LE(*r.cells[i].simulated_peak, r.cells[i].budget);
    if (i > 0) {
      EXPECT_LE(*r.cells[i].objective, *r.cells[i - 1].objective);
    }
  }
  EXPECT_EQ(r.baseline_cost, Rational(32));
  EXPECT_EQ(*r.cells.back().objective, r.baseline_cost);
}

TEST(Sweep, RejectsEmptyBudgets) {
  auto inst = load_fixture("chain3");
  SweepOptions o;
  EXPECT_THROW(sweep(inst.g, inst.c, o), Error);
  o.budgets = {10};
  o.modes.clear();
  EXPECT_THROW(sweep(inst.g, inst.c, o), Error);
}

TEST(Sweep, JointModeDominatesAblations) {
  auto inst = load_fixture("residual8");
  SweepOptions o;
  o.budgets = {10, 12};
  o.modes = {AblationMode::kNone, AblationMode::kConv, AblationMode::kOut, AblationMode::kAll};
  SweepResult r = sweep(inst.g, inst.c, o);
  for (std::size_t i = 0; i < r.cells.size(); i += 4) {
    const SweepCell& all = r.cells[i + 3];
    ASSERT_EQ(all.mode, AblationMode::kAll);
    for (std::size_t j = i; j < i + 3; ++j) {
      if (r.cells[j].objective) {
        ASSERT_TRUE(all.objective.has_value());
        EXPECT_LE(*all.objective, *r.cells[j].objective);
      }
    }
  }
}

TEST(Sweep, ThreadCountDoesNotChangeNodeLimitedResults) {
  auto inst = load_fixture("resnet_toy");
  SweepOptions o;
  o.budgets = {28 << 20, 32 << 20};
  o.solve.node_limit = 20000;
  o.solve.time_limit = 600;
  const std::string one = sweep_csv(sweep(inst.g, inst.c, o));
  o.threads = 2;
  EXPECT_EQ(sweep_csv(sweep(inst.g, inst.c, o)), one);
}

TEST(Sweep, CsvColumnsAndOverhead) {
  auto inst = load_fixture("chain3");
  SweepOptions o;
  o.budgets = {100};
  const std::string csv = sweep_csv(sweep(inst.g, inst.c, o));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "budget,mode,status,objective,simulated_peak,overhead_vs_store_everything_%");
  EXPECT_DOUBLE_EQ(overhead_percent(Rational(3, 2), Rational(1)), 50.0);
}

}  // namespace
}  // namespace ckptopt
