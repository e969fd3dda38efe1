// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "ckptopt/memmodel.hpp"
#include "ckptopt/schedule.hpp"
#include "test_util.hpp"

namespace ckptopt {
namespace {

using testing::build;
using testing::chain_spec;
using testing::problem_of;

ScheduleSlice empty_slice(const Problem& p, int delta_bwd = 0) {
  ScheduleSlice s;
  const auto T = static_cast<std::size_t>(p.num_tensors());
  s.s_prev.assign(T, 0);
  s.s_next.assign(T, 0);
  s.r.assign(T, 0);
  s.q.assign(T, 0);
  s.delta_fwd.assign(T, 0);
  s.delta_bwd = delta_bwd;
  return s;
}

void set(BitVec& b, const Problem& p, const std::string& label) {
  b[static_cast<std::size_t>(p.sets.position_of(label) - 1)] = 1;
}

int stage_of(const Problem& p, int node) { return p.stage_of_node(node); }

TEST(ForwardMem, EmptyCaseIsZero) {
  auto spec = chain_spec(2);
  spec[0].bytes = 0;
  Problem p = problem_of(build(spec));
  EXPECT_EQ(forward_mem(p, empty_slice(p), 1), 0);
}

TEST(ForwardMem, WorkspaceOutputLocalAndSaved) {
  auto spec = chain_spec(3);
  spec[0].bytes = 3;
  spec[1].bytes = 6;
  spec[2].bytes = 4;
  spec[2].fwd[0].workspace = 2;
  Problem p = problem_of(build(spec));
  ScheduleSlice s = empty_slice(p);
  set(s.s_next, p, "x1");  // saved, not local to node 3
  EXPECT_EQ(forward_mem(p, s, 3), 15);
}

TEST(ForwardMem, UnitChainStoringEverything) {
  Problem p = problem_of(build(chain_spec(4), 5));
  ScheduleSlice s = empty_slice(p);
  s.s_next.assign(4, 1);
  EXPECT_EQ(forward_mem(p, s, 4), 4 + p.params());
}

TEST(BackwardMem, GradientPlusDependency) {
  auto spec = chain_spec(2);
  spec[0].bytes = 2;
  Problem p = problem_of(build(spec));
  const int k = stage_of(p, 2);
  ASSERT_EQ(p.sets.grad_local_bytes[static_cast<std::size_t>(k)], 0);
  EXPECT_EQ(backward_mem(p, empty_slice(p), k), 3);
}

TEST(BackwardMem, StoredDependenciesCountOnce) {
  auto spec = chain_spec(3);
  spec[0].bytes = 2;
  spec[1].bytes = 2;
  spec[2].deps = {1, 2};
  spec[2].bwd[0].workspace = 5;
  Problem p = problem_of(build(spec));
  const int k = stage_of(p, 3);
  ScheduleSlice s = empty_slice(p);
  set(s.s_prev, p, "x1");
  set(s.s_prev, p, "x2");
  const Bytes expected = 5 + p.grad_bytes[static_cast<std::size_t>(k)] + p.sets.grad_local_bytes[static_cast<std::size_t>(k)] + 4;
  EXPECT_EQ(backward_mem(p, s, k), expected);
}

TEST(BackwardMem, ZeroSizesGiveZero) {
  auto spec = chain_spec(3);
  for (auto& n : spec) {
    n.bytes = 0;
    n.grad = 0;
  }
  Problem p = problem_of(build(spec));
  for (int k = 0; k < p.num_stages(); ++k) EXPECT_EQ(backward_mem(p, empty_slice(p), k), 0);
}

TEST(RecomputeMem, ActiveSingleRecompute) {
  auto spec = chain_spec(3);
  spec[0].bytes = 3;
  spec[2].grad = 2;
  Problem p = problem_of(build(spec));
  const int k = stage_of(p, 2);
  ASSERT_EQ(p.sets.grad_local_bytes[static_cast<std::size_t>(k)], 2);
  ScheduleSlice s = empty_slice(p);
  set(s.r, p, "x2");
  EXPECT_EQ(recompute_mem_active(p, s, 2, k), 6);
  EXPECT_EQ(recompute_mem(p, s, 2, k), 6);
}

TEST(RecomputeMem, InactivePathDelegates) {
  Problem p = problem_of(build(chain_spec(3)));
  ScheduleSlice s = empty_slice(p);
  for (int k = 0; k < p.num_stages(); ++k) {
    for (int pos = 1; pos <= 3; ++pos) EXPECT_EQ(recompute_mem(p, s, pos, k), recompute_mem_inactive(p, s, pos, k));
  }
}

TEST(RecomputeMem, InactiveWithoutDependenciesIsGradientLocals) {
  Problem p = problem_of(build(chain_spec(3)));
  const int k = stage_of(p, 1);
  ASSERT_TRUE(p.bwd[static_cast<std::size_t>(k)][0].deps.empty());
  const Bytes locals = p.sets.grad_local_bytes[static_cast<std::size_t>(k)];
  EXPECT_GT(locals, 0);
  for (int pos = 1; pos <= 3; ++pos) EXPECT_EQ(recompute_mem_inactive(p, empty_slice(p), pos, k), locals);
}

TEST(RecomputeMem, InactiveStoredAndFutureSaved) {
  auto spec = chain_spec(4);
  spec[0].bytes = 5;
  spec[2].bytes = 2;
  Problem p = problem_of(build(spec));
  const int k = stage_of(p, 2);
  const Bytes locals = p.sets.grad_local_bytes[static_cast<std::size_t>(k)];
  ScheduleSlice s = empty_slice(p);
  set(s.s_prev, p, "x1");
  set(s.s_next, p, "x3");
  EXPECT_EQ(recompute_mem_inactive(p, s, 2, k), locals + 7);
  // x1 is also the backward call's dependency: it counts once, and counts
  // even when it is not held.
  s.s_prev[0] = 0;
  EXPECT_EQ(recompute_mem_inactive(p, s, 2, k), locals + 7);
}

TEST(RecomputeMem, UpperBoundDominatesTight) {
  auto inst = testing::load_fixture("resnet_toy");
  Problem upper = problem_of(inst, AblationMode::kAll, BoundKind::kUpper);
  Problem tight = problem_of(inst, AblationMode::kAll, BoundKind::kTight);
  bool strict = false;
  for (const Schedule& sched : candidate_schedules(upper)) {
    for (int k = 0; k < upper.num_stages(); ++k) {
      ScheduleSlice su = stage_slice(upper, sched, k);
      ScheduleSlice st = stage_slice(tight, sched, k);
      for (int pos = 1; pos <= upper.num_tensors(); ++pos) {
        if (su.r[static_cast<std::size_t>(pos - 1)] == 0) continue;
        const Bytes a = recompute_mem_active(upper, su, pos, k);
        const Bytes b = recompute_mem_active(tight, st, pos, k);
        EXPECT_GE(a, b);
        strict = strict || a > b;
      }
    }
  }
  EXPECT_TRUE(strict);
}

TEST(Monotonicity, MoreStoredNeverLowersMemory) {
  auto inst = testing::load_fixture("residual8");
  Problem p = problem_of(inst);
  const int T = p.num_tensors();
  for (int k = 0; k < p.num_stages(); ++k) {
    ScheduleSlice s = empty_slice(p);
    for (int j = 1; j <= T; ++j) {
      const Bytes before = backward_mem(p, s, k);
      s.s_prev[static_cast<std::size_t>(j - 1)] = 1;
      EXPECT_GE(backward_mem(p, s, k), before);
    }
  }
  ScheduleSlice f = empty_slice(p);
  for (int j = 1; j <= T; ++j) {
    std::vector<Bytes> before;
    for (int i = 1; i <= T; ++i) before.push_back(forward_mem(p, f, i));
    f.s_next[static_cast<std::size_t>(j - 1)] = 1;
    for (int i = 1; i <= T; ++i) EXPECT_GE(forward_mem(p, f, i), before[static_cast<std::size_t>(i - 1)]);
  }
}

TEST(ScheduleCost, StoreEverythingChain) {
  Problem p = problem_of(testing::load_fixture("chain3"));
  Schedule s = store_everything(p);
  EXPECT_EQ(schedule_cost(p, s), Rational(6));
  s.stages[1].recompute.emplace_back(1, p.fwd_variants(1)[0].name);
  EXPECT_EQ(schedule_cost(p, s), Rational(7));
}

TEST(ScheduleCost, InferenceOnlyGraphCostsForwardOnly) {
  auto spec = chain_spec(3);
  for (auto& n : spec) n.backward = false;
  spec[1].fwd[0].cost = "5/2";
  Problem p = problem_of(build(spec));
  EXPECT_EQ(p.num_stages(), 0);
  EXPECT_EQ(schedule_cost(p, store_everything(p)), Rational(9, 2));
}

}  // namespace
}  // namespace ckptopt
