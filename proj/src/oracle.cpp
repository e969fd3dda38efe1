// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/oracle.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "ckptopt/memmodel.hpp"
#include "json_util.hpp"
#include "resolve.hpp"

namespace ckptopt {

namespace {

using Mask = std::uint64_t;

Mask bit_of(int pos) { return Mask{1} << (pos - 1); }
bool in_mask(Mask m, int pos) { return (m & bit_of(pos)) != 0; }

template <typename Fn>
void for_bits(Mask m, Fn fn) {
  while (m != 0) {
    fn(std::countr_zero(m) + 1);
    m &= m - 1;
  }
}

struct Ways {
  std::uint64_t n = 0;
  bool saturated = false;

  static Ways one() { return {1, false}; }
  Ways& operator+=(const Ways& o) {
    saturated = saturated || o.saturated || __builtin_add_overflow(n, o.n, &n);
    if (saturated) n = std::numeric_limits<std::uint64_t>::max();
    return *this;
  }
  Ways& operator*=(const Ways& o) {
    if (n == 0 || o.n == 0) return *this = Ways{0, false};
    saturated = saturated || o.saturated || __builtin_mul_overflow(n, o.n, &n);
    if (saturated) n = std::numeric_limits<std::uint64_t>::max();
    return *this;
  }
};

// One backward stage: variant, recomputations, in-place set and kept row.
// `options[t - 1]` lists the feasible implementations of each recomputed t.
struct Transition {
  int variant = 0;
  Mask r = 0;
  Mask q = 0;
  Mask out = 0;
  std::vector<std::vector<int>> options;
  Rational cost;  // backward call plus the cheapest recomputations
  Ways ways;
};

struct Value {
  bool feasible = false;
  Rational best;
  Ways ways;
};

class Enumerator {
 public:
  Enumerator(const Problem& problem, Bytes budget, bool inplace) : P(problem), M(budget), inplace_(inplace) {
    T = P.num_tensors();
    S = P.num_stages();
    if (T > 63) throw Error(ErrorCode::kCapExceeded, "oracle supports at most 63 tensors");
    bytes_.resize(static_cast<std::size_t>(T) + 1, 0);
    upto_.assign(static_cast<std::size_t>(T) + 1, 0);
    for (int p = 1; p <= T; ++p) {
      bytes_[static_cast<std::size_t>(p)] = P.bytes(p);
      upto_[static_cast<std::size_t>(p)] = upto_[static_cast<std::size_t>(p - 1)] | bit_of(p);
      if (P.is_intermediate(p)) intermediates_ |= bit_of(p);
      local_fwd_.push_back(to_mask(P.sets.local_fwd[static_cast<std::size_t>(p - 1)]));
      inputs_.push_back(P.inputs(p));
    }
    all_ = upto_[static_cast<std::size_t>(T)];
    for (int k = 0; k < S; ++k) {
      frontier_.push_back(upto_[static_cast<std::size_t>(P.frontier(k))]);
      std::vector<Mask> deps;
      for (const BwdVariant& v : P.bwd[static_cast<std::size_t>(k)]) deps.push_back(to_mask(v.deps));
      deps_.push_back(std::move(deps));
      std::vector<Mask> local;
      for (int p = 1; p <= T; ++p) local.push_back(to_mask(P.local_bound(k, p)));
      local_.push_back(std::move(local));
      Mask elig = 0;
      Mask has_p = 0;
      if (inplace_) {
        for (int t = 1; t <= P.frontier(k); ++t) {
          const int j = P.inplace_input[static_cast<std::size_t>(t - 1)];
          if (j == 0) continue;
          elig |= bit_of(t);
          has_p |= bit_of(j);
        }
      }
      eligible_.push_back(elig);
      has_p_.push_back(has_p);
      theta_.push_back(P.params() + P.sets.grad_local_bytes[static_cast<std::size_t>(k)]);
    }
    memo_.resize(static_cast<std::size_t>(S));
  }

  const Problem& P;
  Bytes M;
  int T = 0;
  int S = 0;
  std::uint64_t examined = 0;

  Bytes sum(Mask m) const {
    Bytes total = 0;
    for_bits(m, [&](int p) { total += bytes_[static_cast<std::size_t>(p)]; });
    return total;
  }
  Mask below(int p) const { return upto_[static_cast<std::size_t>(p - 1)]; }
  Mask above(int p) const { return all_ & ~upto_[static_cast<std::size_t>(p)]; }

  // Feasible forward implementations of each position for a forward row.
  bool forward_options(Mask sf, std::vector<std::vector<int>>& options) const {
    options.assign(static_cast<std::size_t>(T), {});
    for (int p = 1; p <= T; ++p) {
      const Bytes held = P.params() + bytes_[static_cast<std::size_t>(p)] +
                         sum((local_fwd_[static_cast<std::size_t>(p - 1)] | sf) & below(p));
      const auto& vs = P.fwd_variants(p);
      for (std::size_t l = 0; l < vs.size(); ++l) {
        if (held + vs[l].workspace <= M) options[static_cast<std::size_t>(p - 1)].push_back(static_cast<int>(l));
      }
      if (options[static_cast<std::size_t>(p - 1)].empty()) return false;
    }
    return true;
  }

  Rational cheapest(int p, const std::vector<int>& opts) const {
    Rational best = P.fwd_variants(p)[static_cast<std::size_t>(opts.front())].cost;
    for (int l : opts) best = std::min(best, P.fwd_variants(p)[static_cast<std::size_t>(l)].cost);
    return best;
  }

  void transitions(int k, Mask in, const std::function<void(const Transition&)>& emit) {
    const auto& variants = P.bwd[static_cast<std::size_t>(k)];
    const Mask F = frontier_[static_cast<std::size_t>(k)];
    const Bytes theta = theta_[static_cast<std::size_t>(k)];
    for (std::size_t l = 0; l < variants.size(); ++l) {
      const Mask D = deps_[static_cast<std::size_t>(k)][l];
      const Bytes bwd_fixed = theta + variants[l].workspace + P.grad_bytes[static_cast<std::size_t>(k)];
      auto fits = [&](Mask out) {
        if (bwd_fixed + sum(D | out) > M) return false;
        for (int p = 1; p <= T; ++p) {
          if (theta + sum((D | out) & upto_[static_cast<std::size_t>(p)]) + sum(in & above(p)) > M) return false;
        }
        return true;
      };
      if (!fits(0)) continue;
      std::vector<int> cand;
      for_bits(in | F, [&](int p) { cand.push_back(p); });
      // Both memory rows grow with the kept set, so supersets of a failing
      // set are skipped.
      std::function<void(std::size_t, Mask)> grow = [&](std::size_t i, Mask out) {
        if (i == cand.size()) {
          with_out(k, static_cast<int>(l), in, out, emit);
          return;
        }
        grow(i + 1, out);
        const Mask bigger = out | bit_of(cand[i]);
        if (fits(bigger)) grow(i + 1, bigger);
      };
      grow(0, 0);
    }
  }

  Value value(int k, Mask in) {
    if (k == S) return {true, Rational(0), Ways::one()};
    auto& memo = memo_[static_cast<std::size_t>(k)];
    auto it = memo.find(in);
    if (it != memo.end()) return it->second;
    Value v;
    transitions(k, in, [&](const Transition& tr) {
      Value next = value(k + 1, tr.out);
      if (!next.feasible) return;
      Rational total = tr.cost + next.best;
      Ways w = tr.ways;
      w *= next.ways;
      if (!v.feasible || total < v.best) v.best = total;
      v.feasible = true;
      v.ways += w;
    });
    memo_[static_cast<std::size_t>(k)].emplace(in, v);
    return v;
  }

 private:
  bool inplace_;
  std::vector<Bytes> bytes_;
  std::vector<Mask> upto_;
  Mask all_ = 0;
  Mask intermediates_ = 0;
  std::vector<Mask> local_fwd_;
  std::vector<std::vector<int>> inputs_;
  std::vector<Mask> frontier_;
  std::vector<std::vector<Mask>> deps_;
  std::vector<std::vector<Mask>> local_;
  std::vector<Mask> eligible_;
  std::vector<Mask> has_p_;
  std::vector<Bytes> theta_;
  std::vector<std::unordered_map<Mask, Value>> memo_;

  Mask to_mask(const std::vector<int>& positions) const {
    Mask m = 0;
    for (int p : positions) m |= bit_of(p);
    return m;
  }

  void with_out(int k, int l, Mask in, Mask out, const std::function<void(const Transition&)>& emit) {
    const Mask F = frontier_[static_cast<std::size_t>(k)];
    const Mask D = deps_[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
    const Mask elig = eligible_[static_cast<std::size_t>(k)];
    const Mask has_p = has_p_[static_cast<std::size_t>(k)];
    const Bytes theta = theta_[static_cast<std::size_t>(k)];
    // Implementations that keep the recompute peak of t within budget, out of
    // place (plain) and in place (over).
    std::vector<std::vector<int>> plain(static_cast<std::size_t>(T));
    std::vector<std::vector<int>> over(static_cast<std::size_t>(T));
    Mask avail = 0;
    Mask can_over = 0;
    for_bits(F, [&](int t) {
      const Bytes held = theta + sum((local_[static_cast<std::size_t>(k)][static_cast<std::size_t>(t - 1)] | D | out) & below(t)) +
                         sum(in & above(t));
      const auto& vs = P.fwd_variants(t);
      const bool may_over = in_mask(elig, t) && !in_mask(out, P.inplace_input[static_cast<std::size_t>(t - 1)]);
      for (std::size_t v = 0; v < vs.size(); ++v) {
        if (held + vs[v].workspace + bytes_[static_cast<std::size_t>(t)] <= M) {
          plain[static_cast<std::size_t>(t - 1)].push_back(static_cast<int>(v));
        }
        if (may_over && vs[v].inplace && held + vs[v].workspace <= M) {
          over[static_cast<std::size_t>(t - 1)].push_back(static_cast<int>(v));
        }
      }
      if (!plain[static_cast<std::size_t>(t - 1)].empty() || !over[static_cast<std::size_t>(t - 1)].empty()) avail |= bit_of(t);
      if (!over[static_cast<std::size_t>(t - 1)].empty()) can_over |= bit_of(t);
    });
    const Mask need = out & ~in;
    if ((need & ~avail) != 0) return;
    const Mask extra_space = avail & ~need;
    Mask extra = 0;
    while (true) {
      const Mask r = need | extra;
      if (closed(r)) {
        const Mask qspace = r & can_over;
        Mask q = 0;
        while (true) {
          ++examined;
          try_stage(k, l, in, out, r, q, D, elig, has_p, plain, over, emit);
          if (q == qspace) break;
          q = (q - qspace) & qspace;
        }
      }
      if (extra == extra_space) break;
      extra = (extra - extra_space) & extra_space;
    }
  }

  // A mask is only rebuilt by rerunning its creator.
  bool closed(Mask r) const {
    bool ok = true;
    for_bits(r & intermediates_, [&](int t) {
      if (!in_mask(r, inputs_[static_cast<std::size_t>(t - 1)].front())) ok = false;
    });
    return ok;
  }

  void try_stage(int k, int l, Mask in, Mask out, Mask r, Mask q, Mask D, Mask elig, Mask has_p,
                 const std::vector<std::vector<int>>& plain, const std::vector<std::vector<int>>& over,
                 const std::function<void(const Transition&)>& emit) {
    (void)in;
    Mask overwritten = 0;
    bool ok = true;
    for_bits(q, [&](int t) {
      const Mask j = bit_of(P.inplace_input[static_cast<std::size_t>(t - 1)]);
      if ((overwritten & j) != 0) ok = false;  // one in-place consumer per input
      overwritten |= j;
    });
    if (!ok) return;
    // Every other eligible consumer of an overwritten input forces p_j >= r_j.
    for_bits(elig & ~q, [&](int t) {
      const int j = P.inplace_input[static_cast<std::size_t>(t - 1)];
      if (in_mask(overwritten, j) && in_mask(r, j)) ok = false;
    });
    if (!ok) return;
    const Mask pj = has_p & r & ~overwritten;
    for_bits(r & ~intermediates_, [&](int t) {
      const bool own_elig = in_mask(elig, t);
      const int own_in = P.inplace_input[static_cast<std::size_t>(t - 1)];
      for (int j : inputs_[static_cast<std::size_t>(t - 1)]) {
        const bool own = own_elig && own_in == j;
        const bool kept = in_mask(out, j);
        if (!in_mask(has_p, j) || own) {
          if (!kept && !in_mask(r, j)) ok = false;
        }
        if (in_mask(has_p, j)) {
          if (!kept && !in_mask(pj, j) && !(own && in_mask(q, t))) ok = false;
        }
      }
    });
    if (!ok) return;
    for_bits(D, [&](int j) {
      const bool made = in_mask(has_p, j) ? in_mask(pj, j) : in_mask(r, j);
      if (!in_mask(out, j) && !made) ok = false;
    });
    if (!ok) return;
    Transition tr;
    tr.variant = l;
    tr.r = r;
    tr.q = q;
    tr.out = out;
    tr.cost = P.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)].cost;
    tr.ways = Ways::one();
    tr.options.assign(static_cast<std::size_t>(T), {});
    for_bits(r, [&](int t) {
      const auto& opts = in_mask(q, t) ? over[static_cast<std::size_t>(t - 1)] : plain[static_cast<std::size_t>(t - 1)];
      if (opts.empty()) ok = false;
      if (!ok) return;
      tr.options[static_cast<std::size_t>(t - 1)] = opts;
      tr.cost += cheapest(t, opts);
      tr.ways *= Ways{opts.size(), false};
    });
    if (!ok) return;
    emit(tr);
  }
};

Schedule skeleton(const Problem& P) {
  Schedule s;
  for (int p = 1; p <= P.num_tensors(); ++p) s.tensors.push_back(P.sets.tensor(p).label);
  return s;
}

BitVec to_bits(Mask m, int T) {
  BitVec b(static_cast<std::size_t>(T), 0);
  for_bits(m, [&](int p) { b[static_cast<std::size_t>(p - 1)] = 1; });
  return b;
}

// Every choice of minimum-cost implementations, in index order.
void cheapest_choices(const Problem& P, const std::vector<std::vector<int>>& options, Mask r,
                      const std::function<bool(const std::vector<int>&)>& visit) {
  std::vector<int> positions;
  std::vector<std::vector<int>> picks;
  for_bits(r, [&](int t) {
    const auto& opts = options[static_cast<std::size_t>(t - 1)];
    Rational best = P.fwd_variants(t)[static_cast<std::size_t>(opts.front())].cost;
    for (int l : opts) best = std::min(best, P.fwd_variants(t)[static_cast<std::size_t>(l)].cost);
    std::vector<int> keep;
    for (int l : opts) {
      if (P.fwd_variants(t)[static_cast<std::size_t>(l)].cost == best) keep.push_back(l);
    }
    positions.push_back(t);
    picks.push_back(std::move(keep));
  });
  std::vector<int> choice(static_cast<std::size_t>(P.num_tensors()), -1);
  std::function<bool(std::size_t)> rec = [&](std::size_t i) {
    if (i == positions.size()) return visit(choice);
    for (int l : picks[i]) {
      choice[static_cast<std::size_t>(positions[i] - 1)] = l;
      if (!rec(i + 1)) return false;
    }
    return true;
  };
  rec(0);
}

void check_caps(const Problem& P, const OracleOptions& options) {
  if (P.graph.num_nodes() > options.max_nodes) {
    throw Error(ErrorCode::kCapExceeded, "oracle limited to " + std::to_string(options.max_nodes) + " nodes, graph has " +
                                             std::to_string(P.graph.num_nodes()));
  }
  std::size_t widest = 0;
  for (const auto& vs : P.fwd) widest = std::max(widest, vs.size());
  for (const auto& vs : P.bwd) widest = std::max(widest, vs.size());
  if (widest > static_cast<std::size_t>(options.max_variants)) {
    throw Error(ErrorCode::kCapExceeded, "oracle limited to " + std::to_string(options.max_variants) +
                                             " implementations per operator, found " + std::to_string(widest));
  }
}

}  // namespace

OracleResult enumerate(const Problem& problem, Bytes budget, const OracleOptions& options) {
  check_caps(problem, options);
  const Problem& P = problem;
  Enumerator en(P, budget, options.inplace);
  const int T = en.T;
  OracleResult res;
  Ways total;
  std::vector<std::vector<int>> fopts;
  const Mask rows = Mask{1} << T;
  for (Mask sf = 0; sf < rows; ++sf) {
    if (!en.forward_options(sf, fopts)) continue;
    Value v = en.value(0, sf);
    if (!v.feasible) continue;
    Rational cost = v.best;
    Ways w = v.ways;
    for (int p = 1; p <= T; ++p) {
      cost += en.cheapest(p, fopts[static_cast<std::size_t>(p - 1)]);
      w *= Ways{fopts[static_cast<std::size_t>(p - 1)].size(), false};
    }
    total += w;
    if (!res.feasible || cost < res.optimum) res.optimum = cost;
    res.feasible = true;
  }
  res.enumerated_count = total.n;
  res.count_saturated = total.saturated;
  if (res.feasible && options.max_schedules > 0) {
    // Walk back through the stages collecting schedules that attain the optimum.
    std::vector<OracleSchedule>& found = res.optimal_schedules;
    const auto limit = static_cast<std::size_t>(options.max_schedules);
    Schedule cur = skeleton(P);
    std::function<bool(int, Mask, const Rational&)> walk = [&](int k, Mask in, const Rational& remaining) {
      if (k == en.S) {
        PeakReport pk = model_peak(P, cur);
        found.push_back({cur, pk.bound_peak, pk.true_peak});
        return found.size() < limit;
      }
      bool more = true;
      en.transitions(k, in, [&](const Transition& tr) {
        if (!more) return;
        Value next = en.value(k + 1, tr.out);
        if (!next.feasible || tr.cost + next.best != remaining) return;
        cheapest_choices(P, tr.options, tr.r, [&](const std::vector<int>& choice) {
          StagePlan st;
          st.node = P.stage_node(k);
          st.backward_impl = P.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(tr.variant)].name;
          for_bits(tr.r, [&](int t) {
            st.recompute.emplace_back(t, P.fwd_variants(t)[static_cast<std::size_t>(choice[static_cast<std::size_t>(t - 1)])].name);
          });
          st.store = to_bits(tr.out, T);
          for_bits(tr.q, [&](int t) { st.inplace.push_back(t); });
          cur.stages.push_back(std::move(st));
          more = walk(k + 1, tr.out, next.best);
          cur.stages.pop_back();
          return more;
        });
      });
      return more;
    };
    for (Mask sf = 0; sf < rows && found.size() < limit; ++sf) {
      if (!en.forward_options(sf, fopts)) continue;
      Value v = en.value(0, sf);
      if (!v.feasible) continue;
      Rational fcost;
      for (int p = 1; p <= T; ++p) fcost += en.cheapest(p, fopts[static_cast<std::size_t>(p - 1)]);
      if (fcost + v.best != res.optimum) continue;
      cheapest_choices(P, fopts, rows - 1, [&](const std::vector<int>& choice) {
        cur = skeleton(P);
        cur.forward_store = to_bits(sf, T);
        for (int p = 1; p <= T; ++p) {
          cur.forward_impl.push_back(P.fwd_variants(p)[static_cast<std::size_t>(choice[static_cast<std::size_t>(p - 1)])].name);
        }
        return walk(0, sf, v.best);
      });
    }
  }
  res.transitions = en.examined;
  return res;
}

Judgement judge(const Problem& problem, const Schedule& schedule, Bytes budget, bool inplace) {
  const Problem& P = problem;
  const int T = P.num_tensors();
  const int S = P.num_stages();
  Judgement j;
  std::set<std::string> seen;
  auto violate = [&](const std::string& tag) {
    if (seen.insert(tag).second) j.reasons.push_back(tag);
  };
  if (schedule.tensors.size() != static_cast<std::size_t>(T) || schedule.forward_store.size() != static_cast<std::size_t>(T) ||
      schedule.forward_impl.size() != static_cast<std::size_t>(T) || schedule.stages.size() != static_cast<std::size_t>(S)) {
    j.reasons.push_back("shape");
    return j;
  }
  for (int p = 1; p <= T; ++p) {
    if (detail::find_fwd_variant(P, p, schedule.forward_impl[static_cast<std::size_t>(p - 1)]) < 0) violate("impl");
  }
  for (int k = 0; k < S; ++k) {
    const StagePlan& st = schedule.stages[static_cast<std::size_t>(k)];
    if (st.node != P.stage_node(k) || st.store.size() != static_cast<std::size_t>(T)) violate("shape");
    if (detail::find_bwd_variant(P, k, st.backward_impl) < 0) violate("impl");
    for (const auto& [pos, impl] : st.recompute) {
      if (pos < 1 || pos > T || detail::find_fwd_variant(P, pos, impl) < 0) violate("impl");
    }
    for (int pos : st.inplace) {
      if (pos < 1 || pos > T) violate("shape");
    }
  }
  if (!j.reasons.empty()) return j;
  j.cost = schedule_cost(P, schedule);

  const ScheduleSlice f = forward_slice(P, schedule);
  for (int p = 1; p <= T; ++p) {
    if (forward_mem(P, f, p) > budget) violate("Eq1");
  }
  for (int k = 0; k < S; ++k) {
    const ScheduleSlice sl = stage_slice(P, schedule, k);
    const BwdVariant& bv = P.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(sl.delta_bwd)];
    const int frontier = P.frontier(k);
    auto r = [&](int p) { return sl.r[static_cast<std::size_t>(p - 1)] != 0; };
    auto q = [&](int p) { return sl.q[static_cast<std::size_t>(p - 1)] != 0; };
    auto out = [&](int p) { return sl.s_prev[static_cast<std::size_t>(p - 1)] != 0; };
    auto held = [&](int p) { return sl.s_next[static_cast<std::size_t>(p - 1)] != 0; };
    auto eligible = [&](int t) { return inplace && t <= frontier && P.inplace_input[static_cast<std::size_t>(t - 1)] != 0; };

    std::map<int, int> overwriters;  // input -> in-place consumers
    std::set<int> has_p;
    for (int t = 1; t <= T; ++t) {
      if (r(t) && t > frontier) violate("fixing");
      if (eligible(t)) has_p.insert(P.inplace_input[static_cast<std::size_t>(t - 1)]);
      if (!q(t)) continue;
      if (!eligible(t)) {
        violate("inplace");
        continue;
      }
      const int in = P.inplace_input[static_cast<std::size_t>(t - 1)];
      overwriters[in] += 1;
      const int l = sl.delta_fwd[static_cast<std::size_t>(t - 1)];
      if (!r(t) || l < 0 || !P.fwd_variants(t)[static_cast<std::size_t>(l)].inplace) violate("inplace");
      if (out(in)) violate("inplace");
    }
    for (const auto& [in, n] : overwriters) {
      if (n > 1) violate("inplace");
    }
    for (int t = 1; t <= T; ++t) {
      if (!eligible(t) || q(t)) continue;
      const int in = P.inplace_input[static_cast<std::size_t>(t - 1)];
      if (overwriters.count(in) != 0 && r(in)) violate("inplace");
    }
    auto p_of = [&](int jpos) { return r(jpos) && overwriters.count(jpos) == 0; };

    for (int t = 1; t <= T; ++t) {
      if (!r(t)) continue;
      if (P.is_intermediate(t)) {
        if (!r(P.inputs(t).front())) violate("intermediate");
        continue;
      }
      for (int jpos : P.inputs(t)) {
        const bool own = eligible(t) && P.inplace_input[static_cast<std::size_t>(t - 1)] == jpos;
        const bool pvar = has_p.count(jpos) != 0;
        if ((!pvar || own) && !out(jpos) && !r(jpos)) violate("Eq7");
        if (pvar && !out(jpos) && !p_of(jpos) && !(own && q(t))) violate("Eq7");
      }
    }
    for (int p = 1; p <= T; ++p) {
      if (out(p) && !held(p) && !r(p)) violate("Eq7");
    }
    for (int jpos : bv.deps) {
      const bool made = has_p.count(jpos) != 0 ? p_of(jpos) : r(jpos);
      if (!out(jpos) && !made) violate("Eq8");
    }
    if (backward_mem(P, sl, k) > budget) violate("Eq5");
    for (int p = 1; p <= T; ++p) {
      if (recompute_mem_inactive(P, sl, p, k) > budget) violate("C2S");
      if (r(p) && recompute_mem_active(P, sl, p, k) > budget) violate("Eq6");
    }
  }
  j.feasible = j.reasons.empty();
  return j;
}

namespace {

using Wide = unsigned __int128;

// Radix of each digit of the unfiltered decision space, forward first.
struct Space {
  std::vector<std::vector<std::uint64_t>> radix;  // [phase][digit]
  Wide total = 1;
  bool overflow = false;
};

Space decision_space(const Problem& P, bool inplace) {
  const int T = P.num_tensors();
  Space sp;
  auto mul = [&](std::uint64_t x) {
    const Wide limit = Wide{1} << 100;
    if (sp.total > limit / x) sp.overflow = true;
    sp.total *= x;
  };
  std::vector<std::uint64_t> fwd;
  for (int p = 1; p <= T; ++p) fwd.push_back(2);
  for (int p = 1; p <= T; ++p) fwd.push_back(P.fwd_variants(p).size());
  sp.radix.push_back(fwd);
  for (int k = 0; k < P.num_stages(); ++k) {
    std::vector<std::uint64_t> st{P.bwd[static_cast<std::size_t>(k)].size()};
    for (int t = 1; t <= P.frontier(k); ++t) st.push_back(1 + P.fwd_variants(t).size());
    for (int t = 1; t <= P.frontier(k); ++t) {
      if (inplace && P.inplace_input[static_cast<std::size_t>(t - 1)] != 0) st.push_back(2);
    }
    for (int p = 1; p <= T; ++p) st.push_back(2);
    sp.radix.push_back(st);
  }
  for (const auto& phase : sp.radix) {
    for (std::uint64_t x : phase) mul(x);
  }
  return sp;
}

Schedule decode_index(const Problem& P, bool inplace, const Space& sp, Wide index) {
  const int T = P.num_tensors();
  std::vector<std::vector<std::uint64_t>> digits(sp.radix.size());
  for (std::size_t ph = sp.radix.size(); ph-- > 0;) {
    digits[ph].resize(sp.radix[ph].size());
    for (std::size_t d = sp.radix[ph].size(); d-- > 0;) {
      digits[ph][d] = static_cast<std::uint64_t>(index % sp.radix[ph][d]);
      index /= sp.radix[ph][d];
    }
  }
  Schedule s = skeleton(P);
  const auto& fd = digits[0];
  for (int p = 1; p <= T; ++p) s.forward_store.push_back(static_cast<std::uint8_t>(fd[static_cast<std::size_t>(p - 1)]));
  for (int p = 1; p <= T; ++p) {
    s.forward_impl.push_back(P.fwd_variants(p)[fd[static_cast<std::size_t>(T + p - 1)]].name);
  }
  for (int k = 0; k < P.num_stages(); ++k) {
    const auto& d = digits[static_cast<std::size_t>(k) + 1];
    std::size_t i = 0;
    StagePlan st;
    st.node = P.stage_node(k);
    st.backward_impl = P.bwd[static_cast<std::size_t>(k)][d[i++]].name;
    for (int t = 1; t <= P.frontier(k); ++t) {
      const std::uint64_t v = d[i++];
      if (v > 0) st.recompute.emplace_back(t, P.fwd_variants(t)[v - 1].name);
    }
    for (int t = 1; t <= P.frontier(k); ++t) {
      if (!inplace || P.inplace_input[static_cast<std::size_t>(t - 1)] == 0) continue;
      if (d[i++] != 0) st.inplace.push_back(t);
    }
    for (int p = 1; p <= T; ++p) st.store.push_back(static_cast<std::uint8_t>(d[i++]));
    s.stages.push_back(std::move(st));
  }
  return s;
}

}  // namespace

std::uint64_t for_each_candidate(const Problem& problem, bool inplace, std::uint64_t limit,
                                 const std::function<void(const Schedule&)>& visit) {
  if (problem.num_tensors() > 63) throw Error(ErrorCode::kCapExceeded, "decision space too large to index");
  const Space sp = decision_space(problem, inplace);
  if (sp.overflow) throw Error(ErrorCode::kCapExceeded, "decision space too large to index");
  const Wide count = std::min<Wide>(sp.total, limit);
  for (Wide i = 0; i < count; ++i) visit(decode_index(problem, inplace, sp, i * sp.total / count));
  return static_cast<std::uint64_t>(count);
}

double candidate_space_size(const Problem& problem, bool inplace) {
  double total = 1;
  for (const auto& phase : decision_space(problem, inplace).radix) {
    for (std::uint64_t x : phase) total *= static_cast<double>(x);
  }
  return total;
}

CrossCheckReport cross_check(const Problem& problem, const std::vector<Bytes>& budgets, const CrossCheckOptions& options) {
  CrossCheckReport rep;
  for (Bytes budget : budgets) {
    CrossCheckRow row;
    row.budget = budget;
    OracleResult ora = enumerate(problem, budget, options.oracle);
    row.oracle_feasible = ora.feasible;
    row.oracle_optimum = ora.optimum;
    row.enumerated_count = ora.enumerated_count;
    IlpOptions io;
    io.bound_kind = problem.sets.bound_kind;
    io.inplace = options.oracle.inplace;
    io.ablation = problem.mode;
    io.memory_rhs_delta = options.memory_rhs_delta;
    IlpModel model = build_model(problem, budget, io);
    SolveResult sr = solve(model, options.solve);
    row.status = sr.status;
    if (sr.has_solution()) {
      row.solver_objective = sr.objective;
      Schedule s = decode(model, sr.assignment);
      Judgement jd = judge(problem, s, budget, options.oracle.inplace);
      row.solver_schedule_feasible = jd.feasible && jd.cost == sr.objective;
      row.match = ora.feasible && sr.status == SolveStatus::kOptimal && sr.objective == ora.optimum &&
                  row.solver_schedule_feasible;
      if (!row.match) row.counterexample = serialize_schedule(s);
    } else {
      row.match = !ora.feasible && sr.status == SolveStatus::kInfeasible;
      if (!row.match && !ora.optimal_schedules.empty()) {
        row.counterexample = serialize_schedule(ora.optimal_schedules.front().schedule);
      }
    }
    rep.all_pass = rep.all_pass && row.match;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::string cross_check_json(const CrossCheckReport& report) {
  nlohmann::json doc;
  doc["all_pass"] = report.all_pass;
  doc["rows"] = nlohmann::json::array();
  for (const CrossCheckRow& r : report.rows) {
    nlohmann::json j;
    j["budget"] = r.budget;
    j["oracle_feasible"] = r.oracle_feasible;
    j["oracle_optimum"] = r.oracle_feasible ? nlohmann::json(r.oracle_optimum.str()) : nlohmann::json(nullptr);
    j["enumerated_count"] = r.enumerated_count;
    j["status"] = to_string(r.status);
    j["solver_objective"] = r.status == SolveStatus::kInfeasible || r.status == SolveStatus::kTimeoutNoIncumbent
                                ? nlohmann::json(nullptr)
                                : nlohmann::json(r.solver_objective.str());
    j["solver_schedule_feasible"] = r.solver_schedule_feasible;
    j["match"] = r.match;
    if (!r.counterexample.empty()) j["counterexample"] = r.counterexample;
    doc["rows"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

}  // namespace ckptopt
