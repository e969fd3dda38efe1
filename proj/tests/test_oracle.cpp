// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "ckptopt/memmodel.hpp"
#include "ckptopt/oracle.hpp"
#include "ckptopt/schedule.hpp"
#include "test_util.hpp"

namespace ckptopt {
namespace {

using testing::load_fixture;
using testing::problem_of;

constexpr Bytes kBig = Bytes{1} << 40;

Bytes smallest_feasible(const Problem& p) {
  OracleOptions o;
  o.max_schedules = 1;
  Bytes b = 1;
  while (!enumerate(p, b, o).feasible) ++b;
  return b;
}

TEST(Enumerate, ChainGenerousBudget) {
  Problem p = problem_of(load_fixture("chain3"));
  OracleResult r = enumerate(p, kBig);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.optimum, Rational(6));
  ASSERT_FALSE(r.optimal_schedules.empty());
  for (const OracleSchedule& s : r.optimal_schedules) {
    EXPECT_TRUE(validate(s.schedule, p).empty());
    EXPECT_EQ(schedule_cost(p, s.schedule), Rational(6));
    EXPECT_LE(s.true_peak, s.bound_peak);
  }
  EXPECT_GT(r.enumerated_count, 1u);
  EXPECT_EQ(enumerate(p, kBig).enumerated_count, r.enumerated_count);
}

TEST(Enumerate, ZeroBudgetIsInfeasible) {
  EXPECT_FALSE(enumerate(problem_of(load_fixture("chain3")), 0).feasible);
}

TEST(Enumerate, WorkspaceForcesTheSlowVariant) {
  auto spec = testing::chain_spec(2);
  spec[1].fwd = {{"fast", 10, "1", false}, {"slow", 0, "3", false}};
  Problem p = problem_of(testing::build(spec));
  OracleResult r = enumerate(p, 4);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.optimum, Rational(6));
  EXPECT_EQ(r.optimal_schedules.front().schedule.forward_impl[1], "slow");
  EXPECT_EQ(enumerate(p, 12).optimum, Rational(4));
}

TEST(Enumerate, RejectsOversizedInstances) {
  EXPECT_THROW(enumerate(problem_of(load_fixture("residual8")), kBig), Error);
}

TEST(Judge, SolverScheduleAndDroppedDependency) {
  Problem p = problem_of(load_fixture("chain3"));
  Schedule s = store_everything(p);
  Judgement ok = judge(p, s, kBig, false);
  EXPECT_TRUE(ok.feasible);
  EXPECT_EQ(ok.cost, Rational(6));
  s.stages[0].store = BitVec{0, 1, 0};
  s.stages[1].store = BitVec{0, 0, 0};
  EXPECT_FALSE(judge(p, s, kBig, false).feasible);
  EXPECT_FALSE(judge(p, store_everything(p), 2, false).feasible);
}

TEST(CrossCheck, SmallResidualSuitePasses) {
  for (bool inplace : {false, true}) {
    Problem p = problem_of(testing::gen(GraphKind::kResidual, 5, 2, 5, 32));
    const Bytes lo = smallest_feasible(p);
    const Bytes hi = simulate(store_everything(p), p).peak;
    CrossCheckOptions o;
    o.oracle.inplace = inplace;
    CrossCheckReport r = cross_check(p, {lo - 1, lo, (lo + hi) / 2, hi}, o);
    EXPECT_TRUE(r.all_pass) << cross_check_json(r);
    ASSERT_EQ(r.rows.size(), 4u);
    EXPECT_FALSE(r.rows[0].oracle_feasible);
    EXPECT_TRUE(r.rows[1].oracle_feasible);
  }
}

TEST(CrossCheck, UnboundedBudgetMatches) {
  CrossCheckReport r = cross_check(problem_of(testing::gen(GraphKind::kChain, 5, 2)), {kBig});
  EXPECT_TRUE(r.all_pass);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].oracle_optimum, r.rows[0].solver_objective);
}

TEST(CrossCheck, DetectsAnOffByOneMemoryRow) {
  Problem p = problem_of(testing::gen(GraphKind::kChain, 5, 1, 0, 32));
  const Bytes lo = smallest_feasible(p);
  CrossCheckOptions o;
  o.memory_rhs_delta = 1;
  CrossCheckReport r = cross_check(p, {lo - 1}, o);
  EXPECT_FALSE(r.all_pass);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_FALSE(r.rows[0].match);
  EXPECT_FALSE(r.rows[0].counterexample.empty());
}

}  // namespace
}  // namespace ckptopt
