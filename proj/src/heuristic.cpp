// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <functional>

#include "ckptopt/schedule.hpp"

namespace ckptopt {

namespace {

struct Policy {
  bool small_fwd = false;   // smallest workspace instead of cheapest
  bool small_bwd = false;   // smallest footprint instead of cheapest
  bool keep_recomputed = false;
  bool store_masks = false;
};

int pick_fwd(const std::vector<FwdVariant>& vs, bool small) {
  int best = 0;
  for (int l = 1; l < static_cast<int>(vs.size()); ++l) {
    const FwdVariant& a = vs[static_cast<std::size_t>(l)];
    const FwdVariant& b = vs[static_cast<std::size_t>(best)];
    bool better = small ? (a.workspace < b.workspace || (a.workspace == b.workspace && a.cost < b.cost))
                        : (a.cost < b.cost || (a.cost == b.cost && a.workspace < b.workspace));
    if (better) best = l;
  }
  return best;
}

Bytes footprint(const Problem& P, const BwdVariant& v) {
  Bytes total = v.workspace;
  for (int j : v.deps) total += P.bytes(j);
  return total;
}

int pick_bwd(const Problem& P, const std::vector<BwdVariant>& vs, bool small) {
  int best = 0;
  for (int l = 1; l < static_cast<int>(vs.size()); ++l) {
    const BwdVariant& a = vs[static_cast<std::size_t>(l)];
    const BwdVariant& b = vs[static_cast<std::size_t>(best)];
    const Bytes fa = footprint(P, a);
    const Bytes fb = footprint(P, b);
    bool better = small ? (fa < fb || (fa == fb && a.cost < b.cost)) : (a.cost < b.cost || (a.cost == b.cost && fa < fb));
    if (better) best = l;
  }
  return best;
}

// stride 0 stores every tensor a backward call reads; otherwise every
// stride-th node output is a checkpoint.
Schedule build(const Problem& P, const Policy& pol, int stride) {
  const int T = P.num_tensors();
  const int S = P.num_stages();
  Schedule s;
  std::vector<int> fwd_choice(static_cast<std::size_t>(T), 0);
  for (int p = 1; p <= T; ++p) {
    s.tensors.push_back(P.sets.tensor(p).label);
    fwd_choice[static_cast<std::size_t>(p - 1)] = pick_fwd(P.fwd_variants(p), pol.small_fwd);
    s.forward_impl.push_back(P.fwd_variants(p)[static_cast<std::size_t>(fwd_choice[static_cast<std::size_t>(p - 1)])].name);
  }
  std::vector<int> bwd_choice(static_cast<std::size_t>(S), 0);
  std::vector<BitVec> later(static_cast<std::size_t>(S) + 1, BitVec(static_cast<std::size_t>(T) + 1, 0));
  for (int k = S - 1; k >= 0; --k) {
    bwd_choice[static_cast<std::size_t>(k)] = pick_bwd(P, P.bwd[static_cast<std::size_t>(k)], pol.small_bwd);
    later[static_cast<std::size_t>(k)] = later[static_cast<std::size_t>(k) + 1];
    for (int j : P.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(bwd_choice[static_cast<std::size_t>(k)])].deps) {
      later[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = 1;
    }
  }

  BitVec checkpoint(static_cast<std::size_t>(T) + 1, 0);
  s.forward_store.assign(static_cast<std::size_t>(T), 0);
  for (int p = 1; p <= T; ++p) {
    const TensorRef& t = P.sets.tensor(p);
    bool keep;
    if (stride == 0) {
      keep = S > 0 && later[0][static_cast<std::size_t>(p)] != 0;
    } else if (t.intermediate) {
      keep = pol.store_masks && S > 0 && later[0][static_cast<std::size_t>(p)] != 0;
    } else {
      keep = t.node % stride == 0;
    }
    checkpoint[static_cast<std::size_t>(p)] = keep ? 1 : 0;
    s.forward_store[static_cast<std::size_t>(p - 1)] = keep ? 1 : 0;
  }

  BitVec held = checkpoint;
  for (int k = 0; k < S; ++k) {
    StagePlan st;
    st.node = P.stage_node(k);
    const BwdVariant& bv = P.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(bwd_choice[static_cast<std::size_t>(k)])];
    st.backward_impl = bv.name;
    BitVec rec(static_cast<std::size_t>(T) + 1, 0);
    BitVec used(static_cast<std::size_t>(T) + 1, 0);
    std::function<void(int)> produce = [&](int j) {
      if (rec[static_cast<std::size_t>(j)] != 0) return;
      rec[static_cast<std::size_t>(j)] = 1;
      for (int i : P.inputs(j)) {
        if (P.is_intermediate(j)) {
          produce(i);  // a mask is only rebuilt by rerunning its creator
        } else if (held[static_cast<std::size_t>(i)] != 0) {
          used[static_cast<std::size_t>(i)] = 1;
        } else {
          produce(i);
        }
      }
    };
    for (int j : bv.deps) {
      if (held[static_cast<std::size_t>(j)] != 0) {
        used[static_cast<std::size_t>(j)] = 1;
      } else {
        produce(j);
      }
    }
    const int next_frontier = k + 1 < S ? P.frontier(k + 1) : 0;
    const BitVec& need_later = later[static_cast<std::size_t>(k) + 1];
    st.store.assign(static_cast<std::size_t>(T), 0);
    BitVec next(static_cast<std::size_t>(T) + 1, 0);
    for (int p = 1; p <= T; ++p) {
      const bool wanted = need_later[static_cast<std::size_t>(p)] != 0 ||
                          (checkpoint[static_cast<std::size_t>(p)] != 0 && p <= next_frontier);
      bool keep = used[static_cast<std::size_t>(p)] != 0 || (held[static_cast<std::size_t>(p)] != 0 && wanted);
      if (pol.keep_recomputed && rec[static_cast<std::size_t>(p)] != 0 && wanted) keep = true;
      st.store[static_cast<std::size_t>(p - 1)] = keep ? 1 : 0;
      next[static_cast<std::size_t>(p)] = keep ? 1 : 0;
      if (rec[static_cast<std::size_t>(p)] != 0) {
        st.recompute.emplace_back(p, P.fwd_variants(p)[static_cast<std::size_t>(fwd_choice[static_cast<std::size_t>(p - 1)])].name);
      }
    }
    held = std::move(next);
    s.stages.push_back(std::move(st));
  }
  return s;
}

}  // namespace

std::vector<Schedule> candidate_schedules(const Problem& problem) {
  int max_node = 0;
  for (const TensorRef& t : problem.sets.tensors) max_node = std::max(max_node, t.node);
  std::vector<int> strides{0};
  for (int st = 1; st <= max_node; st = st < 32 ? st + 1 : st * 2) strides.push_back(st);
  std::vector<Schedule> out;
  for (int bits = 0; bits < 16; ++bits) {
    Policy pol{(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0, (bits & 8) != 0};
    for (int st : strides) {
      if (st == 0 && (pol.keep_recomputed || pol.store_masks)) continue;
      out.push_back(build(problem, pol, st));
    }
  }
  return out;
}

}  // namespace ckptopt
