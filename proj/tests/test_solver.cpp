// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "ckptopt/ilp.hpp"
#include "ckptopt/oracle.hpp"
#include "ckptopt/schedule.hpp"
#include "ckptopt/solver.hpp"
#include "test_util.hpp"

namespace ckptopt {
namespace {

using testing::load_fixture;
using testing::problem_of;

IlpModel chain3(Bytes budget) { return build_model(problem_of(load_fixture("chain3")), budget, {}); }

PartialAssignment unknown(const IlpModel& m) { return PartialAssignment(static_cast<std::size_t>(m.num_vars()), -1); }

bool implies(const PropagationResult& r, int var, int value) {
  return std::find(r.implied.begin(), r.implied.end(), std::make_pair(var, value)) != r.implied.end();
}

TEST(Solve, ChainGenerousBudget) {
  SolveResult r = solve(chain3(100));
  EXPECT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_EQ(r.objective, Rational(6));
  EXPECT_EQ(r.lower_bound, r.objective);
  EXPECT_EQ(r.recomputations, 0);
}

TEST(Solve, ChainBelowLiveSetIsInfeasible) {
  IlpModel m = chain3(1);
  EXPECT_FALSE(enumerate(*m.problem, 1).feasible);
  EXPECT_EQ(solve(m).status, SolveStatus::kInfeasible);
}

TEST(Solve, SqrtBudgetCostsAtMostOneExtraForward) {
  // Live set of 3 plus 2 * ceil(sqrt(16)).
  IlpModel m = build_model(problem_of(load_fixture("chain16")), 3 + 8, {});
  SolveResult r = solve(m);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_LE(r.objective, Rational(16 + 16 + 16));
  EXPECT_EQ(r.objective, Rational(37));
  // The same construction at n = 6, cross-checked by enumeration.
  Problem six = problem_of(testing::gen(GraphKind::kChain, 6));
  OracleResult o = enumerate(six, 3 + 6);
  ASSERT_TRUE(o.feasible);
  EXPECT_EQ(solve(build_model(six, 3 + 6, {})).objective, o.optimum);
}

TEST(Solve, MatchesOracleOnSmallInstances) {
  for (std::uint64_t seed : {1, 4}) {
    for (bool inplace : {false, true}) {
      Problem p = problem_of(testing::gen(GraphKind::kResidual, 5, 2, seed, 32));
      const Bytes peak = simulate(store_everything(p), p).peak;
      for (Bytes budget : {peak, peak * 4 / 5, peak * 3 / 5}) {
        OracleOptions oo;
        oo.inplace = inplace;
        OracleResult o = enumerate(p, budget, oo);
        IlpOptions io;
        io.inplace = inplace;
        IlpModel m = build_model(p, budget, io);
        SolveResult r = solve(m);
        const std::string where = "seed " + std::to_string(seed) + " budget " + std::to_string(budget);
        if (!o.feasible) {
          EXPECT_EQ(r.status, SolveStatus::kInfeasible) << where;
          continue;
        }
        ASSERT_EQ(r.status, SolveStatus::kOptimal) << where;
        EXPECT_EQ(r.objective, o.optimum) << where;
        EXPECT_TRUE(evaluate_assignment(m, r.assignment).feasible) << where;
        EXPECT_TRUE(judge(p, decode(m, r.assignment), budget, inplace).feasible) << where;
      }
    }
  }
}

TEST(Solve, BranchOrdersAgree) {
  for (std::uint64_t seed : {1, 2, 3}) {
    Problem p = problem_of(testing::gen(GraphKind::kResidual, 5, 2, seed, 32));
    const Bytes peak = simulate(store_everything(p), p).peak;
    for (Bytes budget : {peak, peak * 9 / 10, peak * 4 / 5}) {
      OracleResult o = enumerate(p, budget);
      IlpModel m = build_model(p, budget, {});
      for (BranchOrder b : {BranchOrder::kFixedPriority, BranchOrder::kPaperOrder, BranchOrder::kMostFractional}) {
        SolveOptions opt;
        opt.branch_order = b;
        SolveResult r = solve(m, opt);
        const std::string where = std::string(to_string(b)) + " seed " + std::to_string(seed) + " budget " +
                                  std::to_string(budget);
        if (!o.feasible) {
          EXPECT_EQ(r.status, SolveStatus::kInfeasible) << where;
          continue;
        }
        ASSERT_EQ(r.status, SolveStatus::kOptimal) << where;
        EXPECT_EQ(r.objective, o.optimum) << where;
      }
    }
  }
}

TEST(Solve, OptimumNonincreasingInBudget) {
  Problem p = problem_of(load_fixture("chain16"));
  std::optional<Rational> prev;
  for (Bytes budget = 4; budget <= 18; ++budget) {
    SolveResult r = solve(build_model(p, budget, {}));
    ASSERT_EQ(r.status, SolveStatus::kOptimal) << budget;
    if (prev) {
      EXPECT_LE(r.objective, *prev) << budget;
    }
    prev = r.objective;
  }
  EXPECT_EQ(*prev, Rational(32));
}

TEST(Solve, TelemetryIsMonotone) {
  SolveOptions o;
  o.node_limit = 200000;
  SolveResult r = solve(build_model(problem_of(load_fixture("resnet_toy")), 24 << 20, {}), o);
  ASSERT_FALSE(r.telemetry.empty());
  for (std::size_t i = 1; i < r.telemetry.size(); ++i) {
    EXPECT_GE(r.telemetry[i].bound, r.telemetry[i - 1].bound);
    if (r.telemetry[i - 1].incumbent) {
      ASSERT_TRUE(r.telemetry[i].incumbent.has_value());
      EXPECT_LE(*r.telemetry[i].incumbent, *r.telemetry[i - 1].incumbent);
    }
  }
  EXPECT_FALSE(telemetry_jsonl(r).empty());
}

TEST(Solve, DeterministicUnderNodeLimit) {
  IlpModel m = build_model(problem_of(load_fixture("resnet_toy")), 24 << 20, {});
  SolveOptions o;
  o.node_limit = 100000;
  o.time_limit = 600;
  SolveResult a = solve(m, o);
  SolveResult b = solve(m, o);
  ASSERT_TRUE(a.has_solution());
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_TRUE(evaluate_assignment(m, a.assignment).feasible);
}

TEST(Solve, NoIncumbentIsReportedAsStatus) {
  SolveOptions o;
  o.node_limit = 1;
  o.heuristics = false;
  SolveResult r = solve(build_model(problem_of(load_fixture("resnet_toy")), 19 << 20, {}), o);
  EXPECT_EQ(r.status, SolveStatus::kTimeoutNoIncumbent);
  EXPECT_FALSE(r.has_solution());
}

TEST(Propagate, BackwardChoiceForcesRecompute) {
  IlpModel m = chain3(100);
  PartialAssignment a = unknown(m);
  a[static_cast<std::size_t>(m.db[0][0])] = 1;
  a[static_cast<std::size_t>(m.s[0][1])] = 0;
  PropagationResult r = propagate(a, m);
  EXPECT_FALSE(r.pruned);
  EXPECT_TRUE(implies(r, m.r[0][1], 1));
}

TEST(Propagate, LastOpenOneHotMemberIsSet) {
  IlpModel m = build_model(problem_of(load_fixture("chain16v2")), 1000, {});
  PartialAssignment a = unknown(m);
  a[static_cast<std::size_t>(m.df[0][0])] = 0;
  EXPECT_TRUE(implies(propagate(a, m), m.df[0][1], 1));
}

TEST(Propagate, ExceededMemoryRowPrunes) {
  IlpModel m = chain3(2);
  PartialAssignment a = unknown(m);
  for (int v : m.sf) a[static_cast<std::size_t>(v)] = 1;
  EXPECT_TRUE(propagate(a, m).pruned);
}

TEST(LowerBound, MinimumCostsPlusFixedRecomputes) {
  IlpModel m = chain3(100);
  PartialAssignment a = unknown(m);
  EXPECT_EQ(lower_bound(a, m), Rational(6));
  a[static_cast<std::size_t>(m.r[1][0])] = 1;
  EXPECT_EQ(lower_bound(a, m), Rational(7));
}

TEST(LowerBound, NeverExceedsTheOptimum) {
  Problem p = problem_of(testing::gen(GraphKind::kResidual, 5, 2, 3, 32));
  const Bytes peak = simulate(store_everything(p), p).peak;
  for (Bytes budget : {peak, peak * 2 / 3}) {
    OracleResult o = enumerate(p, budget);
    if (!o.feasible) continue;
    IlpModel m = build_model(p, budget, {});
    EXPECT_LE(lower_bound(unknown(m), m), o.optimum);
  }
}

}  // namespace
}  // namespace ckptopt
