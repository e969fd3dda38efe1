// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "ckptopt/problem.hpp"
#include "ckptopt/schedule.hpp"

namespace ckptopt {

/// Decisions of one phase with variant choices as indices into the problem's
/// (ablated) variant lists. For the forward pass only `s_next` (the forward
/// row) and `delta_fwd` are read.
struct ScheduleSlice {
  BitVec s_prev;               // held during the backward call
  BitVec s_next;               // held when the stage starts
  BitVec r;                    // recomputed before the backward call
  std::vector<int> delta_fwd;  // per position, -1 when the tensor is not computed
  int delta_bwd = -1;
  BitVec q;                    // recomputed in place
};

ScheduleSlice forward_slice(const Problem& problem, const Schedule& schedule);
ScheduleSlice stage_slice(const Problem& problem, const Schedule& schedule, int stage);

/// Peak while forward position `pos` runs.
Bytes forward_mem(const Problem& problem, const ScheduleSlice& slice, int pos);
/// Peak of the backward call of `stage`.
Bytes backward_mem(const Problem& problem, const ScheduleSlice& slice, int stage);
/// Bound on the peak while `pos` is recomputed, using the problem's local-set bound.
Bytes recompute_mem_active(const Problem& problem, const ScheduleSlice& slice, int pos, int stage);
/// Memory held at `pos` from stored tensors only.
Bytes recompute_mem_inactive(const Problem& problem, const ScheduleSlice& slice, int pos, int stage);
/// Active form when `pos` is recomputed, inactive form otherwise.
Bytes recompute_mem(const Problem& problem, const ScheduleSlice& slice, int pos, int stage);
/// Active form with the exact local set implied by the slice's recomputations.
Bytes recompute_mem_exact(const Problem& problem, const ScheduleSlice& slice, int pos, int stage);

Rational schedule_cost(const Problem& problem, const Schedule& schedule);

struct PeakReport {
  Bytes bound_peak = 0;  // max over every modeled memory expression
  Bytes true_peak = 0;   // same with exact local sets, op peaks only
};

PeakReport model_peak(const Problem& problem, const Schedule& schedule);

}  // namespace ckptopt
