// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "ckptopt/ilp.hpp"
#include "ckptopt/memmodel.hpp"
#include "ckptopt/schedule.hpp"
#include "ckptopt/solver.hpp"
#include "test_util.hpp"

namespace ckptopt {
namespace {

using testing::fixture;
using testing::load_fixture;
using testing::problem_of;

BitVec bits(const std::string& s) {
  BitVec b;
  for (char c : s) b.push_back(c == '1' ? 1 : 0);
  return b;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(Decode, NoRecomputeOnChain) {
  IlpModel m = build_model(problem_of(load_fixture("chain3")), 100, {});
  SolveResult r = solve(m);
  ASSERT_TRUE(r.has_solution());
  Schedule s = decode(m, r.assignment);
  for (const StagePlan& st : s.stages) EXPECT_TRUE(st.recompute.empty());
  EXPECT_TRUE(validate(s, *m.problem).empty());
}

TEST(Decode, RecomputeFlagBecomesListEntry) {
  IlpModel m = build_model(problem_of(load_fixture("chain3")), 100, {});
  BitVec a = encode(m, store_everything(*m.problem));
  // Stage of node 2 recomputes x1.
  a[static_cast<std::size_t>(m.r[1][0])] = 1;
  a[static_cast<std::size_t>(m.dr[1][0][0])] = 1;
  Schedule s = decode(m, a);
  ASSERT_EQ(s.stages[1].node, 2);
  ASSERT_EQ(s.stages[1].recompute.size(), 1u);
  EXPECT_EQ(s.stages[1].recompute[0].first, 1);
}

TEST(Decode, GoldenResidualSchedule) {
  IlpModel m = build_model(problem_of(load_fixture("residual8")), 9, {});
  SolveResult r = solve(m);
  ASSERT_EQ(r.status, SolveStatus::kOptimal);
  const std::string golden = read_text_file(fixture("golden/residual8_b9.schedule.json"));
  EXPECT_EQ(serialize_schedule(decode(m, r.assignment)), golden);
  EXPECT_EQ(serialize_schedule(parse_schedule(golden)), golden);
}

TEST(Validate, DroppedDependency) {
  Problem p = problem_of(load_fixture("chain3"));
  Schedule s = store_everything(p);
  s.stages[0].store = bits("010");
  s.stages[1].store = bits("000");
  EXPECT_EQ(validate(s, p), (std::vector<std::string>{"Eq8: node k=2 dep x1 unavailable"}));
}

TEST(Validate, StoringANeverComputedTensor) {
  Problem p = problem_of(load_fixture("chain3"));
  Schedule s = store_everything(p);
  s.stages[1].store = bits("101");
  auto v = validate(s, p);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rfind("Eq7: node k=2 stores x3", 0), 0u) << v[0];
}

TEST(Simulate, StoreEverythingChain) {
  Problem p = problem_of(testing::build(testing::chain_spec(3), 5));
  Schedule s = store_everything(p);
  SimulationTrace t = simulate(s, p);
  EXPECT_EQ(t.total_cost, Rational(6));
  EXPECT_EQ(t.total_cost, schedule_cost(p, s));
  EXPECT_EQ(t.peak, 5 + 3);
  for (const TraceStep& st : t.steps) EXPECT_EQ(st.op.find("recompute"), std::string::npos);
}

TEST(Simulate, StoreEverythingRisesThenFalls) {
  Problem p = problem_of(load_fixture("resnet_toy"));
  SimulationTrace t = simulate(store_everything(p), p);
  std::size_t first_bwd = 0;
  while (t.steps[first_bwd].op.rfind("backward", 0) != 0) ++first_bwd;
  for (std::size_t i = 1; i < first_bwd; ++i) EXPECT_GE(t.steps[i].after, t.steps[i - 1].after);
  const Bytes top = t.steps[first_bwd - 1].after;
  for (std::size_t i = first_bwd; i < t.steps.size(); ++i) EXPECT_LE(t.steps[i].before, top);
  EXPECT_LT(t.steps.back().after, top);
  Bytes peak = 0;
  for (const TraceStep& st : t.steps) peak = std::max(peak, st.peak);
  EXPECT_EQ(t.peak, peak);
}

TEST(Simulate, SolverSchedulesFitAndCostTheObjective) {
  Problem p = problem_of(load_fixture("residual8"));
  for (Bytes budget : {9, 10, 11, 12}) {
    IlpModel m = build_model(p, budget, {});
    SolveResult r = solve(m);
    ASSERT_TRUE(r.has_solution()) << budget;
    Schedule s = decode(m, r.assignment);
    SimulationTrace t = simulate(s, p);
    EXPECT_LE(t.peak, budget);
    EXPECT_EQ(t.total_cost, r.objective);
  }
}

TEST(Simulate, ReplayIsDeterministic) {
  Problem p = problem_of(load_fixture("residual8"));
  Schedule s = parse_schedule(read_text_file(fixture("golden/residual8_b9.schedule.json")));
  EXPECT_EQ(trace_report(simulate(s, p), TraceFormat::kJson), trace_report(simulate(s, p), TraceFormat::kJson));
}

TEST(TraceReport, EmptyTraceIsHeaderOnly) {
  EXPECT_EQ(trace_report(SimulationTrace{}, TraceFormat::kCsv), "step,op,mem_before,mem_peak,mem_after,cost\n");
}

TEST(TraceReport, ChainHasSixStepsAndTotals) {
  Problem p = problem_of(load_fixture("chain3"));
  const std::string csv = trace_report(simulate(store_everything(p), p), TraceFormat::kCsv);
  EXPECT_EQ(count_lines(csv), 1u + 6u + 1u);
  EXPECT_NE(csv.find("\ntotal,,,3,,6\n"), std::string::npos) << csv;
}

TEST(TraceReport, GoldenResidualTrace) {
  Problem p = problem_of(load_fixture("residual8"));
  Schedule s = parse_schedule(read_text_file(fixture("golden/residual8_b9.schedule.json")));
  EXPECT_EQ(trace_report(simulate(s, p), TraceFormat::kCsv), read_text_file(fixture("golden/residual8_b9.trace.csv")));
}

}  // namespace
}  // namespace ckptopt
