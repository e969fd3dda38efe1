// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/memmodel.hpp"

#include <algorithm>

#include "resolve.hpp"

namespace ckptopt {

namespace {

bool has(const std::vector<int>& sorted, int v) { return std::binary_search(sorted.begin(), sorted.end(), v); }
bool bit(const BitVec& b, int pos) { return b[static_cast<std::size_t>(pos - 1)] != 0; }

const std::vector<int>& bwd_deps(const Problem& P, const ScheduleSlice& sl, int stage) {
  if (sl.delta_bwd < 0) throw Error(ErrorCode::kInvalidArgument, "slice has no backward variant");
  return P.bwd.at(static_cast<std::size_t>(stage)).at(static_cast<std::size_t>(sl.delta_bwd)).deps;
}

Bytes workspace(const Problem& P, const ScheduleSlice& sl, int pos) {
  int l = sl.delta_fwd[static_cast<std::size_t>(pos - 1)];
  return l < 0 ? 0 : P.fwd_variants(pos).at(static_cast<std::size_t>(l)).workspace;
}

Bytes stage_base(const Problem& P, int stage) {
  return P.params() + P.sets.grad_local_bytes.at(static_cast<std::size_t>(stage));
}

// Recompute peak of `pos` given which earlier tensors are certainly resident.
template <typename LocalFn>
Bytes recompute_peak(const Problem& P, const ScheduleSlice& sl, int pos, int stage, LocalFn in_local) {
  const auto& deps = bwd_deps(P, sl, stage);
  Bytes m = stage_base(P, stage) + workspace(P, sl, pos);
  if (sl.q.empty() || !bit(sl.q, pos)) m += P.bytes(pos);
  for (int j = 1; j < pos; ++j) {
    if (in_local(j) || has(deps, j) || bit(sl.s_prev, j)) m += P.bytes(j);
  }
  for (int j = pos + 1; j <= P.num_tensors(); ++j) {
    if (bit(sl.s_next, j)) m += P.bytes(j);
  }
  return m;
}

}  // namespace

ScheduleSlice forward_slice(const Problem& P, const Schedule& s) {
  ScheduleSlice sl;
  const int T = P.num_tensors();
  sl.s_next = s.forward_store;
  sl.s_prev.assign(static_cast<std::size_t>(T), 0);
  sl.r.assign(static_cast<std::size_t>(T), 0);
  sl.q.assign(static_cast<std::size_t>(T), 0);
  for (int p = 1; p <= T; ++p) sl.delta_fwd.push_back(detail::find_fwd_variant(P, p, s.forward_impl.at(static_cast<std::size_t>(p - 1))));
  return sl;
}

ScheduleSlice stage_slice(const Problem& P, const Schedule& s, int stage) {
  ScheduleSlice sl;
  const int T = P.num_tensors();
  const StagePlan& st = s.stages.at(static_cast<std::size_t>(stage));
  sl.s_prev = st.store;
  sl.s_next = stage == 0 ? s.forward_store : s.stages[static_cast<std::size_t>(stage - 1)].store;
  sl.r.assign(static_cast<std::size_t>(T), 0);
  sl.q.assign(static_cast<std::size_t>(T), 0);
  sl.delta_fwd.assign(static_cast<std::size_t>(T), -1);
  sl.delta_bwd = detail::find_bwd_variant(P, stage, st.backward_impl);
  for (const auto& [pos, impl] : st.recompute) {
    sl.r[static_cast<std::size_t>(pos - 1)] = 1;
    sl.delta_fwd[static_cast<std::size_t>(pos - 1)] = detail::find_fwd_variant(P, pos, impl);
  }
  for (int pos : st.inplace) sl.q[static_cast<std::size_t>(pos - 1)] = 1;
  return sl;
}

Bytes forward_mem(const Problem& P, const ScheduleSlice& sl, int pos) {
  const auto& local = P.sets.local_fwd[static_cast<std::size_t>(pos - 1)];
  Bytes m = P.params() + workspace(P, sl, pos) + P.bytes(pos);
  for (int j = 1; j < pos; ++j) {
    if (has(local, j) || bit(sl.s_next, j)) m += P.bytes(j);
  }
  return m;
}

Bytes backward_mem(const Problem& P, const ScheduleSlice& sl, int stage) {
  const BwdVariant& v = P.bwd.at(static_cast<std::size_t>(stage)).at(static_cast<std::size_t>(sl.delta_bwd));
  Bytes m = stage_base(P, stage) + v.workspace + P.grad_bytes[static_cast<std::size_t>(stage)];
  for (int j = 1; j <= P.num_tensors(); ++j) {
    if (has(v.deps, j) || bit(sl.s_prev, j)) m += P.bytes(j);
  }
  return m;
}

Bytes recompute_mem_active(const Problem& P, const ScheduleSlice& sl, int pos, int stage) {
  const auto& local = P.local_bound(stage, pos);
  return recompute_peak(P, sl, pos, stage, [&](int j) { return has(local, j); });
}

Bytes recompute_mem_inactive(const Problem& P, const ScheduleSlice& sl, int pos, int stage) {
  const auto& deps = bwd_deps(P, sl, stage);
  Bytes m = stage_base(P, stage);
  for (int j = 1; j <= pos; ++j) {
    if (has(deps, j) || bit(sl.s_prev, j)) m += P.bytes(j);
  }
  for (int j = pos + 1; j <= P.num_tensors(); ++j) {
    if (bit(sl.s_next, j)) m += P.bytes(j);
  }
  return m;
}

Bytes recompute_mem(const Problem& P, const ScheduleSlice& sl, int pos, int stage) {
  return bit(sl.r, pos) ? recompute_mem_active(P, sl, pos, stage) : recompute_mem_inactive(P, sl, pos, stage);
}

Bytes recompute_mem_exact(const Problem& P, const ScheduleSlice& sl, int pos, int stage) {
  const int T = P.num_tensors();
  return recompute_peak(P, sl, pos, stage, [&](int j) {
    for (int t = pos; t <= T; ++t) {
      if (bit(sl.r, t) && has(P.inputs(t), j)) return true;
    }
    return false;
  });
}

Rational schedule_cost(const Problem& P, const Schedule& s) {
  Rational total;
  for (int p = 1; p <= P.num_tensors(); ++p) {
    int l = detail::find_fwd_variant(P, p, s.forward_impl.at(static_cast<std::size_t>(p - 1)));
    if (l < 0) throw Error(ErrorCode::kValidation, "unknown forward impl for " + P.sets.tensor(p).label);
    total += P.fwd_variants(p)[static_cast<std::size_t>(l)].cost;
  }
  for (int k = 0; k < P.num_stages(); ++k) {
    const StagePlan& st = s.stages.at(static_cast<std::size_t>(k));
    int b = detail::find_bwd_variant(P, k, st.backward_impl);
    if (b < 0) throw Error(ErrorCode::kValidation, "unknown backward impl '" + st.backward_impl + "'");
    total += P.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)].cost;
    for (const auto& [pos, impl] : st.recompute) {
      int l = detail::find_fwd_variant(P, pos, impl);
      if (l < 0) throw Error(ErrorCode::kValidation, "unknown recompute impl '" + impl + "'");
      total += P.fwd_variants(pos)[static_cast<std::size_t>(l)].cost;
    }
  }
  return total;
}

PeakReport model_peak(const Problem& P, const Schedule& s) {
  PeakReport rep;
  const int T = P.num_tensors();
  ScheduleSlice f = forward_slice(P, s);
  for (int p = 1; p <= T; ++p) {
    Bytes m = forward_mem(P, f, p);
    rep.bound_peak = std::max(rep.bound_peak, m);
    rep.true_peak = std::max(rep.true_peak, m);
  }
  for (int k = 0; k < P.num_stages(); ++k) {
    ScheduleSlice sl = stage_slice(P, s, k);
    Bytes b = backward_mem(P, sl, k);
    rep.bound_peak = std::max(rep.bound_peak, b);
    rep.true_peak = std::max(rep.true_peak, b);
    for (int p = 1; p <= T; ++p) {
      rep.bound_peak = std::max(rep.bound_peak, recompute_mem_inactive(P, sl, p, k));
      if (sl.r[static_cast<std::size_t>(p - 1)] == 0) continue;
      rep.bound_peak = std::max(rep.bound_peak, recompute_mem_active(P, sl, p, k));
      rep.true_peak = std::max(rep.true_peak, recompute_mem_exact(P, sl, p, k));
    }
  }
  return rep;
}

}  // namespace ckptopt
