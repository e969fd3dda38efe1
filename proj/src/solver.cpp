// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "ckptopt/schedule.hpp"
#include "json_util.hpp"

namespace ckptopt {

const char* to_string(BranchOrder order) {
  switch (order) {
    case BranchOrder::kPaperOrder: return "paper-order";
    case BranchOrder::kMostFractional: return "most-fractional";
    case BranchOrder::kFixedPriority: return "fixed-priority";
  }
  return "fixed-priority";
}

BranchOrder parse_branch_order(const std::string& text) {
  if (text == "paper-order") return BranchOrder::kPaperOrder;
  if (text == "most-fractional") return BranchOrder::kMostFractional;
  if (text == "fixed-priority") return BranchOrder::kFixedPriority;
  throw Error(ErrorCode::kInvalidArgument, "unknown branch order '" + text + "'");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasibleGap: return "feasible-gap";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kTimeoutNoIncumbent: return "timeout-no-incumbent";
  }
  return "?";
}

std::optional<double> SolveResult::gap() const {
  if (!has_solution()) return std::nullopt;
  if (objective.num() == 0) return 0.0;
  return std::max(0.0, (objective - lower_bound).to_double() / objective.to_double());
}

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
constexpr int kLnsWindow = 3;
constexpr int kLnsPasses = 8;
constexpr std::int64_t kLnsNodesPerBlock = 4000;

/// sum(a_i x_i) <= rhs with terms sorted by |a| descending.
struct IntRow {
  std::vector<int> var;
  std::vector<std::int64_t> a;
  std::int64_t rhs = 0;
};

struct Occ {
  int row;
  std::int64_t a;
};

/// One-hot choice whose cost is counted once a member is chosen, or as the
/// cheapest open member while the group is active.
struct Group {
  std::vector<int> members;
  int activator = -1;  // group is active when this variable is 1; -1 = always
  int block = 0;
};

struct IntModel {
  int n = 0;
  std::vector<IntRow> rows;
  std::vector<std::vector<Occ>> occ;
  bool trivially_infeasible = false;
  std::int64_t obj_scale = 1;
  std::vector<std::int64_t> prim;   // scaled primary cost per variable
  std::int64_t weight = 1;          // primary multiplier in the combined objective
  std::vector<std::int64_t> cost;   // combined cost per variable
  std::vector<Group> groups;
  std::vector<int> group_of;        // -1 if none
  std::vector<std::vector<int>> activates;
  std::vector<std::int8_t> root_fixed;  // -1 or forced value
};

std::int64_t to_int(const Rational& r, std::int64_t scale) {
  Rational v = r * Rational(scale);
  if (!v.is_integer()) throw Error(ErrorCode::kInternal, "row scaling failed");
  return v.num();
}

void add_row(IntModel& im, std::vector<std::pair<int, std::int64_t>> terms, std::int64_t rhs) {
  std::stable_sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) {
    return std::llabs(x.second) > std::llabs(y.second);
  });
  IntRow row;
  for (const auto& [v, a] : terms) {
    row.var.push_back(v);
    row.a.push_back(a);
  }
  row.rhs = rhs;
  if (row.var.empty()) {
    if (rhs < 0) im.trivially_infeasible = true;
    return;
  }
  const int id = static_cast<int>(im.rows.size());
  for (std::size_t i = 0; i < row.var.size(); ++i) im.occ[static_cast<std::size_t>(row.var[i])].push_back({id, row.a[i]});
  im.rows.push_back(std::move(row));
}

// Store bits no stage at or after `stage` can read are dominated by zero:
// clearing them never raises memory and no constraint needs them.
void fix_unusable_stores(const IlpModel& model, IntModel& im) {
  const Problem& P = *model.problem;
  const int T = P.num_tensors();
  const int S = P.num_stages();
  std::vector<int> min_consumer(static_cast<std::size_t>(T) + 1, T + 1);
  for (int i = 1; i <= T; ++i) {
    if (P.is_intermediate(i)) continue;
    for (int j : P.inputs(i)) min_consumer[static_cast<std::size_t>(j)] = std::min(min_consumer[static_cast<std::size_t>(j)], i);
  }
  std::vector<std::uint8_t> in_deps(static_cast<std::size_t>(T) + 1, 0);
  for (int k = S - 1; k >= 0; --k) {
    for (const BwdVariant& v : P.bwd[static_cast<std::size_t>(k)]) {
      for (int j : v.deps) in_deps[static_cast<std::size_t>(j)] = 1;
    }
    for (int j = 1; j <= T; ++j) {
      bool usable = in_deps[static_cast<std::size_t>(j)] != 0 || min_consumer[static_cast<std::size_t>(j)] <= P.frontier(k);
      if (!usable) im.root_fixed[static_cast<std::size_t>(model.s[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)])] = 0;
    }
  }
  for (int j = 1; j <= T; ++j) {
    int first = S > 0 ? model.s[0][static_cast<std::size_t>(j - 1)] : -1;
    if (S == 0 || im.root_fixed[static_cast<std::size_t>(first)] == 0) {
      im.root_fixed[static_cast<std::size_t>(model.sf[static_cast<std::size_t>(j - 1)])] = 0;
    }
  }
}

IntModel integerize(const IlpModel& model) {
  IntModel im;
  im.n = model.num_vars();
  im.occ.assign(static_cast<std::size_t>(im.n), {});
  for (const LinearConstraint& c : model.constraints) {
    std::int64_t scale = checked_lcm(c.constant.den(), c.rhs.den());
    for (const Term& t : c.terms) scale = checked_lcm(scale, t.coef.den());
    std::vector<std::pair<int, std::int64_t>> terms;
    for (const Term& t : c.terms) terms.emplace_back(t.var, to_int(t.coef, scale));
    const std::int64_t rhs = to_int(c.rhs - c.constant, scale);
    if (c.sense != Sense::kGe) add_row(im, terms, rhs);
    if (c.sense != Sense::kLe) {
      for (auto& t : terms) t.second = -t.second;
      add_row(im, terms, -rhs);
    }
  }
  for (const Term& t : model.objective) im.obj_scale = checked_lcm(im.obj_scale, t.coef.den());
  im.prim.assign(static_cast<std::size_t>(im.n), 0);
  __int128 total = 0;
  for (const Term& t : model.objective) {
    im.prim[static_cast<std::size_t>(t.var)] = to_int(t.coef, im.obj_scale);
    if (im.prim[static_cast<std::size_t>(t.var)] < 0) throw Error(ErrorCode::kInternal, "negative objective coefficient");
    total += im.prim[static_cast<std::size_t>(t.var)];
  }
  std::int64_t n_r = 0;
  for (const VarInfo& v : model.vars) n_r += v.kind == VarKind::kRecompute ? 1 : 0;
  im.weight = n_r + 1;
  if (total * im.weight + n_r > static_cast<__int128>(kInf / 4)) {
    throw Error(ErrorCode::kInternal, "objective too large for exact search");
  }
  im.cost.assign(static_cast<std::size_t>(im.n), 0);
  for (int v = 0; v < im.n; ++v) {
    im.cost[static_cast<std::size_t>(v)] = im.prim[static_cast<std::size_t>(v)] * im.weight +
                                           (model.vars[static_cast<std::size_t>(v)].kind == VarKind::kRecompute ? 1 : 0);
  }

  im.group_of.assign(static_cast<std::size_t>(im.n), -1);
  im.activates.assign(static_cast<std::size_t>(im.n), {});
  auto add_group = [&](const std::vector<int>& members, int activator) {
    if (members.empty()) return;
    const int id = static_cast<int>(im.groups.size());
    im.groups.push_back({members, activator, 0});
    for (int v : members) im.group_of[static_cast<std::size_t>(v)] = id;
    if (activator >= 0) im.activates[static_cast<std::size_t>(activator)].push_back(id);
  };
  for (const auto& g : model.df) add_group(g, -1);
  for (const auto& g : model.db) add_group(g, -1);
  for (std::size_t k = 0; k < model.dr.size(); ++k) {
    for (std::size_t p = 0; p < model.dr[k].size(); ++p) add_group(model.dr[k][p], model.r[k][p]);
  }
  for (int v = 0; v < im.n; ++v) {
    if (im.prim[static_cast<std::size_t>(v)] != 0 && im.group_of[static_cast<std::size_t>(v)] < 0) {
      throw Error(ErrorCode::kInternal, "objective variable outside a one-hot group");
    }
  }
  im.root_fixed.assign(static_cast<std::size_t>(im.n), -1);
  for (int v = 0; v < im.n; ++v) {
    if (model.vars[static_cast<std::size_t>(v)].fixed_zero) im.root_fixed[static_cast<std::size_t>(v)] = 0;
  }
  return im;
}

enum class Pref : std::uint8_t { kZero, kOne, kCopy };

struct MemoEntry {
  enum Kind : std::uint8_t { kExact, kBound, kInfeasible } kind = kBound;
  std::int64_t value = 0;
  std::vector<std::uint8_t> completion;  // values of the variables after the cut, exact entries only
};

class Search {
 public:
  Search(const IlpModel& model, const IntModel& im, const SolveOptions& opt)
      : model_(model), im_(im), opt_(opt), start_(std::chrono::steady_clock::now()) {
    const int n = im.n;
    val_.assign(static_cast<std::size_t>(n), -1);
    minact_.assign(im.rows.size(), 0);
    in_queue_.assign(im.rows.size(), 0);
    for (std::size_t r = 0; r < im.rows.size(); ++r) {
      for (std::int64_t a : im.rows[r].a) minact_[r] += a < 0 ? a : 0;
    }
    pref_.assign(static_cast<std::size_t>(n), Pref::kZero);
    copy_of_.assign(static_cast<std::size_t>(n), -1);
    block_.assign(static_cast<std::size_t>(n), 0);
    build_order();
    group_contrib_.assign(im.groups.size(), 0);
    block_lb_.assign(static_cast<std::size_t>(num_blocks_), 0);
    block_rec_.assign(static_cast<std::size_t>(num_blocks_), 0);
    for (std::size_t g = 0; g < im.groups.size(); ++g) {
      im_groups_block(g);
      refresh_group(static_cast<int>(g));
    }
    build_cuts();
    if (use_memo_) build_forced();
  }

  /// Starts the search from a known feasible assignment.
  void seed(const BitVec& bits, std::int64_t value) {
    incumbent_ = value;
    incumbent_bits_.assign(bits.begin(), bits.end());
    ++incumbent_id_;
    record(false);
  }

  SolveResult run() {
    SolveResult res;
    bool ok = !im_.trivially_infeasible;
    for (int v = 0; ok && v < im_.n; ++v) {
      std::int8_t f = im_.root_fixed[static_cast<std::size_t>(v)];
      if (f >= 0 && val_[static_cast<std::size_t>(v)] < 0) {
        assign(v, f);
        ok = propagate_queue();
      } else if (f >= 0 && val_[static_cast<std::size_t>(v)] != f) {
        ok = false;
      }
    }
    for (std::size_t r = 0; ok && r < im_.rows.size(); ++r) enqueue(static_cast<int>(r));
    ok = ok && propagate_queue();
    if (ok && use_memo_ && incumbent_ < kInf) improve();
    if (ok && !aborted_) dfs(0, -1);
    record(true);

    res.nodes = nodes_;
    res.memo_hits = memo_hits_;
    res.telemetry = telemetry_;
    const bool complete = !aborted_;
    if (incumbent_ < kInf) {
      res.assignment.assign(incumbent_bits_.begin(), incumbent_bits_.end());
      res.objective = Rational(incumbent_ / im_.weight, im_.obj_scale);
      res.recomputations = static_cast<int>(incumbent_ % im_.weight);
      if (complete) {
        res.status = SolveStatus::kOptimal;
        res.lower_bound = res.objective;
      } else {
        res.status = SolveStatus::kFeasibleGap;
        res.lower_bound = Rational(std::min(global_bound_, incumbent_) / im_.weight, im_.obj_scale);
        if (res.lower_bound == res.objective) res.status = SolveStatus::kOptimal;
      }
    } else {
      res.status = complete ? SolveStatus::kInfeasible : SolveStatus::kTimeoutNoIncumbent;
      res.lower_bound = Rational(global_bound_ / im_.weight, im_.obj_scale);
    }
    if (!res.telemetry.empty()) {
      res.telemetry.back().bound = res.lower_bound;
      if (res.has_solution()) res.telemetry.back().gap = res.gap();
    }
    return res;
  }

 private:
  const IlpModel& model_;
  const IntModel& im_;
  const SolveOptions& opt_;
  std::chrono::steady_clock::time_point start_;

  std::vector<std::int8_t> val_;
  std::vector<std::int64_t> minact_;
  std::vector<int> trail_;
  std::vector<int> queue_;
  std::vector<std::uint8_t> in_queue_;

  std::vector<int> order_;
  std::vector<Pref> pref_;
  std::vector<int> copy_of_;
  std::vector<std::uint8_t> useful_;  // copy preference applies only when set
  std::vector<int> block_;
  int num_blocks_ = 1;
  bool use_memo_ = false;
  bool dynamic_ = false;

  std::vector<std::int64_t> group_contrib_;
  std::vector<std::int64_t> block_lb_;
  std::vector<std::int64_t> block_rec_;  // recomputation share of block_lb_
  std::int64_t total_lb_ = 0;

  // Per stage: positions every completion must hold at some later backward
  // call, and the variables of the row the stage starts from.
  std::vector<BitVec> forced_;
  std::vector<std::vector<int>> in_vars_;
  std::vector<std::int64_t> rec_cost_;  // cheapest recomputation per position
  mutable BitVec scratch_;
  std::vector<int> last_forced_;           // last stage every choice of which reads the position
  std::vector<std::vector<Bytes>> variant_need_;  // workspace plus dependency bytes
  std::vector<std::vector<BitVec>> variant_deps_;
  std::vector<Bytes> stage_cap_;           // memory left beside gradients and parameters
  std::vector<int> by_ratio_;              // forced positions with nonzero size
  mutable std::vector<int> owner_;         // 0 none, -1 shared, else the charged position
  mutable std::vector<std::int64_t> chain_cost_;
  mutable std::vector<int> visit_;
  mutable int visit_mark_ = 0;
  mutable std::vector<int> stack_;
  mutable std::vector<int> order_buf_;

  // Cut c separates block c from block c + 1.
  std::vector<std::vector<int>> cut_keys_;
  std::vector<std::vector<int>> key_cuts_;  // per variable
  std::vector<int> key_assigned_;
  std::vector<int> block_first_;            // first order index of each block
  std::vector<std::unordered_map<std::string, MemoEntry>> memo_;

  std::int64_t incumbent_ = kInf;
  std::vector<std::uint8_t> incumbent_bits_;
  std::int64_t incumbent_id_ = 0;
  std::int64_t nodes_ = 0;
  std::int64_t memo_hits_ = 0;
  bool aborted_ = false;
  bool hard_stop_ = false;  // node or time limit of the whole solve
  bool lns_ = false;        // searching a neighbourhood of the incumbent
  std::int64_t lns_stop_ = 0;
  std::int64_t global_bound_ = 0;
  std::vector<std::int64_t> open_bounds_;  // per depth: bound of a pending sibling, or kInf
  std::vector<TelemetryPoint> telemetry_;

  void im_groups_block(std::size_t g) {
    const Group& grp = im_.groups[g];
    group_block_.resize(im_.groups.size(), 0);
    group_block_[g] = block_[static_cast<std::size_t>(grp.members.front())];
  }
  std::vector<int> group_block_;

  // ---- ordering -----------------------------------------------------------

  // Memory an implementation choice brings along: workspace plus, for
  // backward choices, the tensors it reads.
  Bytes footprint(int v) const {
    const Problem& P = *model_.problem;
    const VarInfo& info = model_.vars[static_cast<std::size_t>(v)];
    if (info.kind == VarKind::kDeltaBwd) {
      const BwdVariant& b = P.bwd[static_cast<std::size_t>(info.stage)][static_cast<std::size_t>(info.variant)];
      Bytes total = b.workspace;
      for (int j : b.deps) total += P.bytes(j);
      return total;
    }
    if (info.kind == VarKind::kDeltaFwd || info.kind == VarKind::kDeltaRe) {
      return P.fwd_variants(info.pos)[static_cast<std::size_t>(info.variant)].workspace;
    }
    return 0;
  }

  void push_group_sorted(std::vector<int>& out, const std::vector<int>& members) {
    std::vector<int> sorted = members;
    std::stable_sort(sorted.begin(), sorted.end(), [&](int x, int y) {
      const std::int64_t cx = im_.prim[static_cast<std::size_t>(x)];
      const std::int64_t cy = im_.prim[static_cast<std::size_t>(y)];
      if (cx != cy) return cx < cy;
      return footprint(x) < footprint(y);
    });
    for (int v : sorted) {
      pref_[static_cast<std::size_t>(v)] = Pref::kOne;
      out.push_back(v);
    }
  }

  void build_order() {
    const Problem& P = *model_.problem;
    const int T = P.num_tensors();
    const int S = P.num_stages();
    const std::size_t n = static_cast<std::size_t>(im_.n);
    auto set_block = [&](int v, int b) { block_[static_cast<std::size_t>(v)] = b; };
    if (opt_.branch_order == BranchOrder::kFixedPriority) {
      use_memo_ = true;
      num_blocks_ = S + 1;
      // wanted[k]: tensors read by the preferred backward choice of stage k or
      // later, plus anything some choice of stage k reads.
      std::vector<BitVec> wanted(static_cast<std::size_t>(S) + 1, BitVec(static_cast<std::size_t>(T), 0));
      for (int k = S - 1; k >= 0; --k) {
        BitVec w = wanted[static_cast<std::size_t>(k) + 1];
        std::vector<int> sorted;
        push_group_sorted(sorted, model_.db[static_cast<std::size_t>(k)]);
        const VarInfo& best = model_.vars[static_cast<std::size_t>(sorted.front())];
        for (int j : P.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(best.variant)].deps) w[static_cast<std::size_t>(j - 1)] = 1;
        wanted[static_cast<std::size_t>(k)] = w;
      }
      for (int k = 0; k < S; ++k) {
        for (const BwdVariant& b : P.bwd[static_cast<std::size_t>(k)]) {
          for (int j : b.deps) wanted[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)] = 1;
        }
      }
      useful_.assign(n, 1);
      for (int p = 1; p <= T; ++p) {
        push_group_sorted(order_, model_.df[static_cast<std::size_t>(p - 1)]);
        int sf = model_.sf[static_cast<std::size_t>(p - 1)];
        pref_[static_cast<std::size_t>(sf)] = S > 0 && wanted[0][static_cast<std::size_t>(p - 1)] == 0 ? Pref::kZero : Pref::kOne;
        order_.push_back(sf);
      }
      for (int v : order_) set_block(v, 0);
      for (int k = 0; k < S; ++k) {
        const std::size_t first = order_.size();
        push_group_sorted(order_, model_.db[static_cast<std::size_t>(k)]);
        for (int p = 1; p <= T; ++p) order_.push_back(model_.r[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)]);
        for (int p = 1; p <= T; ++p) {
          int s = model_.s[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)];
          pref_[static_cast<std::size_t>(s)] = Pref::kCopy;
          useful_[static_cast<std::size_t>(s)] = wanted[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)];
          copy_of_[static_cast<std::size_t>(s)] = k == 0 ? model_.sf[static_cast<std::size_t>(p - 1)]
                                                         : model_.s[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(p - 1)];
          order_.push_back(s);
        }
        for (int p = 1; p <= T; ++p) push_group_sorted(order_, model_.dr[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)]);
        for (int p = 1; p <= T; ++p) {
          int q = model_.q[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)];
          if (q >= 0) order_.push_back(q);
        }
        for (int p = 1; p <= T; ++p) {
          int pv = model_.p[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)];
          if (pv >= 0) order_.push_back(pv);
        }
        for (std::size_t i = first; i < order_.size(); ++i) set_block(order_[i], k + 1);
      }
      for (int v = 0; v < im_.n; ++v) {
        if (model_.vars[static_cast<std::size_t>(v)].kind == VarKind::kAux) {
          set_block(v, model_.vars[static_cast<std::size_t>(v)].stage + 1);
        }
      }
      // Aux variables go last within their stage block.
      std::vector<int> merged;
      merged.reserve(n);
      std::size_t i = 0;
      for (int b = 0; b < num_blocks_; ++b) {
        while (i < order_.size() && block_[static_cast<std::size_t>(order_[i])] == b) merged.push_back(order_[i++]);
        for (int v = 0; v < im_.n; ++v) {
          if (model_.vars[static_cast<std::size_t>(v)].kind == VarKind::kAux && block_[static_cast<std::size_t>(v)] == b) {
            merged.push_back(v);
          }
        }
      }
      order_ = std::move(merged);
    } else {
      // db, then store rows from the forward row down the stages, then r, then
      // implementation choices, then in-place and auxiliary variables.
      for (const auto& g : model_.db) push_group_sorted(order_, g);
      for (int v : model_.sf) {
        pref_[static_cast<std::size_t>(v)] = Pref::kOne;
        order_.push_back(v);
      }
      for (const auto& row : model_.s) {
        for (int v : row) {
          pref_[static_cast<std::size_t>(v)] = Pref::kOne;
          order_.push_back(v);
        }
      }
      for (const auto& row : model_.r) order_.insert(order_.end(), row.begin(), row.end());
      for (const auto& g : model_.df) push_group_sorted(order_, g);
      for (const auto& stage : model_.dr) {
        for (const auto& g : stage) push_group_sorted(order_, g);
      }
      for (const auto& row : model_.q) {
        for (int v : row) if (v >= 0) order_.push_back(v);
      }
      for (const auto& row : model_.p) {
        for (int v : row) if (v >= 0) order_.push_back(v);
      }
      for (int v = 0; v < im_.n; ++v) {
        if (model_.vars[static_cast<std::size_t>(v)].kind == VarKind::kAux) order_.push_back(v);
      }
      dynamic_ = opt_.branch_order == BranchOrder::kMostFractional;
    }
    if (order_.size() != n) throw Error(ErrorCode::kInternal, "branching order does not cover every variable");
  }

  void build_cuts() {
    key_cuts_.assign(static_cast<std::size_t>(im_.n), {});
    if (!use_memo_) return;
    const int cuts = num_blocks_ - 1;
    std::vector<std::vector<std::uint8_t>> is_key(static_cast<std::size_t>(cuts), std::vector<std::uint8_t>(static_cast<std::size_t>(im_.n), 0));
    for (const IntRow& row : im_.rows) {
      int hi = 0;
      for (int v : row.var) hi = std::max(hi, block_[static_cast<std::size_t>(v)]);
      for (int v : row.var) {
        for (int c = block_[static_cast<std::size_t>(v)]; c < hi; ++c) is_key[static_cast<std::size_t>(c)][static_cast<std::size_t>(v)] = 1;
      }
    }
    cut_keys_.assign(static_cast<std::size_t>(cuts), {});
    key_assigned_.assign(static_cast<std::size_t>(cuts), 0);
    memo_.assign(static_cast<std::size_t>(cuts), {});
    for (int c = 0; c < cuts; ++c) {
      for (int v : order_) {
        if (is_key[static_cast<std::size_t>(c)][static_cast<std::size_t>(v)] != 0) {
          cut_keys_[static_cast<std::size_t>(c)].push_back(v);
          key_cuts_[static_cast<std::size_t>(v)].push_back(c);
        }
      }
    }
    block_first_.assign(static_cast<std::size_t>(num_blocks_) + 1, static_cast<int>(order_.size()));
    for (int i = static_cast<int>(order_.size()) - 1; i >= 0; --i) {
      block_first_[static_cast<std::size_t>(block_[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])])] = i;
    }
  }

  // ---- assignment and propagation ----------------------------------------

  void refresh_group(int g) {
    const Group& grp = im_.groups[static_cast<std::size_t>(g)];
    std::int64_t c = 0;
    bool chosen = false;
    for (int v : grp.members) {
      if (val_[static_cast<std::size_t>(v)] == 1) {
        c += im_.cost[static_cast<std::size_t>(v)];
        chosen = true;
      }
    }
    if (!chosen && (grp.activator < 0 || val_[static_cast<std::size_t>(grp.activator)] == 1)) {
      std::int64_t best = kInf;
      for (int v : grp.members) {
        if (val_[static_cast<std::size_t>(v)] < 0) best = std::min(best, im_.cost[static_cast<std::size_t>(v)]);
      }
      c = best == kInf ? 0 : best;
    }
    const std::int64_t delta = c - group_contrib_[static_cast<std::size_t>(g)];
    group_contrib_[static_cast<std::size_t>(g)] = c;
    block_lb_[static_cast<std::size_t>(group_block_[static_cast<std::size_t>(g)])] += delta;
    if (grp.activator >= 0) block_rec_[static_cast<std::size_t>(group_block_[static_cast<std::size_t>(g)])] += delta;
    total_lb_ += delta;
  }

  void enqueue(int row) {
    if (in_queue_[static_cast<std::size_t>(row)] != 0) return;
    in_queue_[static_cast<std::size_t>(row)] = 1;
    queue_.push_back(row);
  }

  void touch_bounds(int v) {
    int g = im_.group_of[static_cast<std::size_t>(v)];
    if (g >= 0) refresh_group(g);
    for (int a : im_.activates[static_cast<std::size_t>(v)]) refresh_group(a);
  }

  void assign(int v, int x) {
    val_[static_cast<std::size_t>(v)] = static_cast<std::int8_t>(x);
    trail_.push_back(v);
    for (const Occ& o : im_.occ[static_cast<std::size_t>(v)]) {
      if (o.a > 0 && x == 1) {
        minact_[static_cast<std::size_t>(o.row)] += o.a;
        enqueue(o.row);
      } else if (o.a < 0 && x == 0) {
        minact_[static_cast<std::size_t>(o.row)] -= o.a;
        enqueue(o.row);
      }
    }
    touch_bounds(v);
    if (im_.group_of[static_cast<std::size_t>(v)] < 0 && x == 1 && im_.cost[static_cast<std::size_t>(v)] != 0) {
      block_lb_[static_cast<std::size_t>(block_[static_cast<std::size_t>(v)])] += im_.cost[static_cast<std::size_t>(v)];
      block_rec_[static_cast<std::size_t>(block_[static_cast<std::size_t>(v)])] += im_.cost[static_cast<std::size_t>(v)];
      total_lb_ += im_.cost[static_cast<std::size_t>(v)];
    }
    for (int c : key_cuts_[static_cast<std::size_t>(v)]) ++key_assigned_[static_cast<std::size_t>(c)];
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      int v = trail_.back();
      trail_.pop_back();
      int x = val_[static_cast<std::size_t>(v)];
      for (const Occ& o : im_.occ[static_cast<std::size_t>(v)]) {
        if (o.a > 0 && x == 1) {
          minact_[static_cast<std::size_t>(o.row)] -= o.a;
        } else if (o.a < 0 && x == 0) {
          minact_[static_cast<std::size_t>(o.row)] += o.a;
        }
      }
      val_[static_cast<std::size_t>(v)] = -1;
      touch_bounds(v);
      if (im_.group_of[static_cast<std::size_t>(v)] < 0 && x == 1 && im_.cost[static_cast<std::size_t>(v)] != 0) {
        block_lb_[static_cast<std::size_t>(block_[static_cast<std::size_t>(v)])] -= im_.cost[static_cast<std::size_t>(v)];
        block_rec_[static_cast<std::size_t>(block_[static_cast<std::size_t>(v)])] -= im_.cost[static_cast<std::size_t>(v)];
        total_lb_ -= im_.cost[static_cast<std::size_t>(v)];
      }
      for (int c : key_cuts_[static_cast<std::size_t>(v)]) --key_assigned_[static_cast<std::size_t>(c)];
    }
  }

  bool propagate_queue() {
    while (!queue_.empty()) {
      int r = queue_.back();
      queue_.pop_back();
      in_queue_[static_cast<std::size_t>(r)] = 0;
      const IntRow& row = im_.rows[static_cast<std::size_t>(r)];
      const std::int64_t slack = row.rhs - minact_[static_cast<std::size_t>(r)];
      if (slack < 0) {
        for (int q : queue_) in_queue_[static_cast<std::size_t>(q)] = 0;
        queue_.clear();
        return false;
      }
      for (std::size_t i = 0; i < row.var.size(); ++i) {
        const std::int64_t a = row.a[i];
        if (std::llabs(a) <= slack) break;
        const int v = row.var[i];
        if (val_[static_cast<std::size_t>(v)] >= 0) continue;
        assign(v, a > 0 ? 0 : 1);
      }
    }
    return true;
  }

  // ---- bounds and memo ----------------------------------------------------

  std::string key_of(int cut) const {
    const auto& keys = cut_keys_[static_cast<std::size_t>(cut)];
    std::string k((keys.size() + 7) / 8, '\0');
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (val_[static_cast<std::size_t>(keys[i])] == 1) k[i / 8] = static_cast<char>(k[i / 8] | (1 << (i % 8)));
    }
    return k;
  }

  std::int64_t sum_blocks(int lo, int hi) const {
    std::int64_t s = 0;
    for (int b = lo; b <= hi; ++b) s += block_lb_[static_cast<std::size_t>(b)];
    return s;
  }

  /// Bound for the current node; consults the memo once the key of the cut
  /// closing `block` is fully assigned.
  std::int64_t bound(int block) const {
    if (!use_memo_ || block >= num_blocks_ - 1) return total_lb_;
    if (lns_) return sum_blocks(0, block) + bounded_future(block);
    const int cut = block;
    const std::int64_t head = sum_blocks(0, cut);
    std::int64_t future = bounded_future(cut);
    if (future >= kInf) return kInf;
    if (key_assigned_[static_cast<std::size_t>(cut)] == static_cast<int>(cut_keys_[static_cast<std::size_t>(cut)].size())) {
      auto it = memo_[static_cast<std::size_t>(cut)].find(key_of(cut));
      if (it != memo_[static_cast<std::size_t>(cut)].end()) {
        if (it->second.kind == MemoEntry::kInfeasible) return kInf;
        future = std::max(future, it->second.value);
      }
    }
    return head + future;
  }

  /// Cost bound of the blocks after `cut`.
  std::int64_t bounded_future(int cut) const {
    std::int64_t tail_rec = 0;
    for (int b = cut + 1; b < num_blocks_; ++b) tail_rec += block_rec_[static_cast<std::size_t>(b)];
    const std::int64_t tail = total_lb_ - sum_blocks(0, cut);
    const std::int64_t rec = future_recompute(cut);
    if (rec >= kInf) return kInf;
    return tail - tail_rec + std::max(tail_rec, rec);
  }

  /// Recomputation every completion pays from `stage` on: a forced tensor
  /// missing from the stage's starting row is recomputed at least once, and so
  /// are its missing inputs. Unassigned bits count as present.
  std::int64_t future_recompute(int stage) const {
    if (stage >= static_cast<int>(forced_.size())) return 0;
    const auto& in = in_vars_[static_cast<std::size_t>(stage)];
    scratch_ = forced_[static_cast<std::size_t>(stage)];
    const Problem& P = *model_.problem;
    std::int64_t total = 0;
    for (int j = P.num_tensors(); j >= 1; --j) {
      if (scratch_[static_cast<std::size_t>(j - 1)] == 0 || val_[static_cast<std::size_t>(in[static_cast<std::size_t>(j - 1)])] != 0) continue;
      total += rec_cost_[static_cast<std::size_t>(j - 1)];
      for (int i : P.inputs(j)) scratch_[static_cast<std::size_t>(i - 1)] = 1;
    }
    const std::int64_t pressure = future_pressure(stage);
    return pressure >= kInf ? kInf : total + pressure;
  }

  std::int64_t evict_cost(int j) const {
    return rec_cost_[static_cast<std::size_t>(j - 1)] + chain_cost_[static_cast<std::size_t>(j - 1)];
  }

  /// A tensor present at `stage` that a later stage must read stays resident
  /// through every stage in between unless it is recomputed. Where the
  /// residents do not fit beside a stage's backward call, the cheapest
  /// fractional choice of evictions bounds the recomputation cost. Unassigned
  /// bits count as present: an absent forced tensor already costs at least
  /// as much in the closure above.
  std::int64_t future_pressure(int stage) const {
    const Problem& P = *model_.problem;
    const auto& in = in_vars_[static_cast<std::size_t>(stage)];
    const int T = P.num_tensors();
    auto absent = [&](int j) { return val_[static_cast<std::size_t>(in[static_cast<std::size_t>(j - 1)])] == 0; };
    // Recomputing an evicted tensor also reruns its absent ancestors. Those
    // reachable from a single candidate are charged to it; shared ones and
    // those the closure already paid for are not charged at all.
    owner_.assign(static_cast<std::size_t>(T), 0);
    for (int j : by_ratio_) {
      if (absent(j)) continue;
      stack_.assign(P.inputs(j).begin(), P.inputs(j).end());
      ++visit_mark_;
      while (!stack_.empty()) {
        const int a = stack_.back();
        stack_.pop_back();
        if (!absent(a) || visit_[static_cast<std::size_t>(a - 1)] == visit_mark_) continue;
        visit_[static_cast<std::size_t>(a - 1)] = visit_mark_;
        int& o = owner_[static_cast<std::size_t>(a - 1)];
        o = o == 0 ? j : -1;
        for (int i : P.inputs(a)) stack_.push_back(i);
      }
    }
    std::fill(chain_cost_.begin(), chain_cost_.end(), 0);
    for (int a = 1; a <= T; ++a) {
      const int o = owner_[static_cast<std::size_t>(a - 1)];
      if (o > 0 && scratch_[static_cast<std::size_t>(a - 1)] == 0) {
        chain_cost_[static_cast<std::size_t>(o - 1)] += rec_cost_[static_cast<std::size_t>(a - 1)];
      }
    }
    // Cheapest eviction per byte first.
    order_buf_.clear();
    for (int j : by_ratio_) {
      if (!absent(j)) order_buf_.push_back(j);
    }
    std::stable_sort(order_buf_.begin(), order_buf_.end(), [&](int x, int y) {
      return static_cast<__int128>(evict_cost(x)) * P.bytes(y) < static_cast<__int128>(evict_cost(y)) * P.bytes(x);
    });
    std::int64_t best = 0;
    for (int m = stage; m < P.num_stages(); ++m) {
      Bytes resident = 0;
      for (int j : by_ratio_) {
        if (last_forced_[static_cast<std::size_t>(j - 1)] >= m && val_[static_cast<std::size_t>(in[static_cast<std::size_t>(j - 1)])] != 0) {
          resident += P.bytes(j);
        }
      }
      const auto& stage_need = variant_need_[static_cast<std::size_t>(m)];
      const Bytes cap = stage_cap_[static_cast<std::size_t>(m)];
      std::int64_t stage_best = kInf;
      for (std::size_t l = 0; l < stage_need.size() && stage_best > 0; ++l) {
        const BitVec& deps = variant_deps_[static_cast<std::size_t>(m)][l];
        Bytes extra = resident;
        for (int j : P.bwd[static_cast<std::size_t>(m)][l].deps) {
          if (last_forced_[static_cast<std::size_t>(j - 1)] >= m && val_[static_cast<std::size_t>(in[static_cast<std::size_t>(j - 1)])] != 0) {
            extra -= P.bytes(j);
          }
        }
        Bytes excess = stage_need[l] + extra - cap;
        if (excess <= 0) {
          stage_best = 0;
          break;
        }
        std::int64_t cost = 0;
        for (int j : order_buf_) {
          if (last_forced_[static_cast<std::size_t>(j - 1)] < m || deps[static_cast<std::size_t>(j - 1)] != 0) continue;
          const Bytes b = P.bytes(j);
          const std::int64_t c = evict_cost(j);
          if (b >= excess) {
            cost += static_cast<std::int64_t>((static_cast<__int128>(c) * excess + b - 1) / b);
            excess = 0;
            break;
          }
          cost += c;
          excess -= b;
        }
        if (excess <= 0) stage_best = std::min(stage_best, cost);
      }
      if (stage_best >= kInf) return kInf;
      best = std::max(best, stage_best);
    }
    return best;
  }

  void build_forced() {
    const Problem& P = *model_.problem;
    const int T = P.num_tensors();
    const int S = P.num_stages();
    forced_.assign(static_cast<std::size_t>(S), BitVec(static_cast<std::size_t>(T), 0));
    in_vars_.assign(static_cast<std::size_t>(S), {});
    BitVec acc(static_cast<std::size_t>(T), 0);
    for (int k = S - 1; k >= 0; --k) {
      const auto& vs = P.bwd[static_cast<std::size_t>(k)];
      for (int j : vs.front().deps) {
        bool all = true;
        for (const BwdVariant& v : vs) all = all && std::binary_search(v.deps.begin(), v.deps.end(), j);
        if (all) acc[static_cast<std::size_t>(j - 1)] = 1;
      }
      forced_[static_cast<std::size_t>(k)] = acc;
      in_vars_[static_cast<std::size_t>(k)] = k == 0 ? model_.sf : model_.s[static_cast<std::size_t>(k - 1)];
    }
    last_forced_.assign(static_cast<std::size_t>(T), -1);
    variant_need_.assign(static_cast<std::size_t>(S), {});
    variant_deps_.assign(static_cast<std::size_t>(S), {});
    stage_cap_.assign(static_cast<std::size_t>(S), 0);
    for (int k = 0; k < S; ++k) {
      const auto& vs = P.bwd[static_cast<std::size_t>(k)];
      for (int j : vs.front().deps) {
        bool all = true;
        for (const BwdVariant& v : vs) all = all && std::binary_search(v.deps.begin(), v.deps.end(), j);
        if (all) last_forced_[static_cast<std::size_t>(j - 1)] = k;
      }
      for (const BwdVariant& v : vs) {
        Bytes need = v.workspace;
        BitVec deps(static_cast<std::size_t>(T), 0);
        for (int j : v.deps) {
          need += P.bytes(j);
          deps[static_cast<std::size_t>(j - 1)] = 1;
        }
        variant_need_[static_cast<std::size_t>(k)].push_back(need);
        variant_deps_[static_cast<std::size_t>(k)].push_back(std::move(deps));
      }
      stage_cap_[static_cast<std::size_t>(k)] = model_.budget + model_.options.memory_rhs_delta - P.params() -
                                                P.grad_bytes[static_cast<std::size_t>(k)] -
                                                P.sets.grad_local_bytes[static_cast<std::size_t>(k)];
    }
    rec_cost_.assign(static_cast<std::size_t>(T), 0);
    for (int p = 1; p <= T; ++p) {
      std::int64_t best = kInf;
      if (P.is_intermediate(p)) {
        best = 0;
      } else {
        for (int v : model_.df[static_cast<std::size_t>(p - 1)]) best = std::min(best, im_.prim[static_cast<std::size_t>(v)]);
      }
      rec_cost_[static_cast<std::size_t>(p - 1)] = best * im_.weight + 1;
    }
    for (int p = 1; p <= T; ++p) {
      if (P.bytes(p) > 0 && last_forced_[static_cast<std::size_t>(p - 1)] >= 0) by_ratio_.push_back(p);
    }
    chain_cost_.assign(static_cast<std::size_t>(T), 0);
    visit_.assign(static_cast<std::size_t>(T), 0);
    std::stable_sort(by_ratio_.begin(), by_ratio_.end(), [&](int x, int y) {
      return static_cast<__int128>(rec_cost_[static_cast<std::size_t>(x - 1)]) * P.bytes(y) <
             static_cast<__int128>(rec_cost_[static_cast<std::size_t>(y - 1)]) * P.bytes(x);
    });
  }

  // ---- search -------------------------------------------------------------

  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

  bool limits_hit() {
    if (aborted_) return true;
    if (opt_.node_limit > 0 && nodes_ >= opt_.node_limit) hard_stop_ = true;
    if ((nodes_ & 255) == 0 && elapsed_ms() > opt_.time_limit * 1000.0) hard_stop_ = true;
    if (hard_stop_ || (lns_ && nodes_ >= lns_stop_)) aborted_ = true;
    if ((nodes_ & 16383) == 0) record(false);
    if (opt_.gap_target > 0 && incumbent_ < kInf && (nodes_ & 255) == 0) {
      std::int64_t b = current_bound();
      if (incumbent_ == 0 || static_cast<double>(incumbent_ - b) <= opt_.gap_target * static_cast<double>(incumbent_)) {
        aborted_ = true;
      }
    }
    return aborted_;
  }

  std::int64_t current_bound() {
    if (lns_) return global_bound_;  // fixings make the open bounds local
    // Unexplored space: pending siblings along the path plus the current node.
    std::int64_t b = std::min(incumbent_, total_lb_);
    for (std::int64_t o : open_bounds_) b = std::min(b, o);
    global_bound_ = std::max(global_bound_, b == kInf ? global_bound_ : b);
    return global_bound_;
  }

  void record(bool final) {
    if (!final && telemetry_.size() >= 4096) return;
    TelemetryPoint pt;
    pt.elapsed_ms = std::floor(elapsed_ms() * 1000.0) / 1000.0;
    std::int64_t b = final && !aborted_ ? (incumbent_ < kInf ? incumbent_ : global_bound_) : current_bound();
    if (final && !aborted_ && incumbent_ < kInf) global_bound_ = incumbent_;
    pt.bound = Rational(b / im_.weight, im_.obj_scale);
    if (incumbent_ < kInf) {
      pt.incumbent = Rational(incumbent_ / im_.weight, im_.obj_scale);
      double inc = pt.incumbent->to_double();
      pt.gap = inc == 0 ? 0.0 : std::max(0.0, (inc - pt.bound.to_double()) / inc);
    }
    telemetry_.push_back(pt);
  }

  void new_incumbent(std::int64_t value) {
    incumbent_ = value;
    incumbent_bits_.assign(static_cast<std::size_t>(im_.n), 0);
    for (int v = 0; v < im_.n; ++v) incumbent_bits_[static_cast<std::size_t>(v)] = val_[static_cast<std::size_t>(v)] == 1 ? 1 : 0;
    ++incumbent_id_;
    record(false);
  }

  int next_unassigned(int from) const {
    for (int i = from; i < static_cast<int>(order_.size()); ++i) {
      if (val_[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])] < 0) return i;
    }
    return static_cast<int>(order_.size());
  }

  int pick_dynamic() const {
    int best = -1;
    double best_score = -1;
    for (int v : order_) {
      if (val_[static_cast<std::size_t>(v)] >= 0) continue;
      double score = 0;
      for (const Occ& o : im_.occ[static_cast<std::size_t>(v)]) {
        const std::int64_t slack = im_.rows[static_cast<std::size_t>(o.row)].rhs - minact_[static_cast<std::size_t>(o.row)];
        score += static_cast<double>(std::llabs(o.a)) / static_cast<double>(slack + 1);
      }
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }
    return best;
  }

  void dfs(int cursor, int cut_done) {
    ++nodes_;
    if (limits_hit()) return;
    int v;
    int block = 0;
    if (dynamic_) {
      v = pick_dynamic();
      if (v < 0) {
        if (total_lb_ < incumbent_) new_incumbent(total_lb_);
        return;
      }
    } else {
      cursor = next_unassigned(cursor);
      if (cursor == static_cast<int>(order_.size())) {
        if (total_lb_ < incumbent_) new_incumbent(total_lb_);
        return;
      }
      v = order_[static_cast<std::size_t>(cursor)];
      block = block_[static_cast<std::size_t>(v)];
      if (use_memo_ && block - 1 > cut_done) {
        enter_cut(cursor, block - 1);
        return;
      }
    }
    branch(v, cursor, cut_done, block);
  }

  /// Improves the incumbent by re-solving windows of consecutive stage
  /// blocks with every other variable held at its incumbent value. Each
  /// window gets a node allowance; passes repeat while they improve.
  void improve() {
    const std::size_t root = trail_.size();
    const std::int64_t total_cap = kLnsNodesPerBlock * num_blocks_ * kLnsPasses;
    const std::int64_t stop_all = nodes_ + total_cap;
    lns_ = true;
    for (int pass = 0; pass < kLnsPasses && !hard_stop_ && nodes_ < stop_all; ++pass) {
      const std::int64_t at_start = incumbent_;
      for (int lo = 0; lo + kLnsWindow <= num_blocks_ && !hard_stop_ && nodes_ < stop_all; ++lo) {
        const std::vector<std::uint8_t> fixed = incumbent_bits_;
        for (int v : order_) {
          const int b = block_[static_cast<std::size_t>(v)];
          if ((b < lo || b >= lo + kLnsWindow) && val_[static_cast<std::size_t>(v)] < 0) {
            assign(v, fixed[static_cast<std::size_t>(v)]);
          }
        }
        lns_stop_ = std::min(stop_all, nodes_ + kLnsNodesPerBlock * kLnsWindow);
        if (propagate_queue()) dfs(0, -1);
        undo_to(root);
        aborted_ = hard_stop_;
      }
      if (incumbent_ == at_start) break;
    }
    lns_ = false;
  }

  void enter_cut(int cursor, int cut) {
    if (lns_) {
      dfs(cursor, cut);
      return;
    }
    const std::string key = key_of(cut);
    auto& table = memo_[static_cast<std::size_t>(cut)];
    const std::int64_t g = sum_blocks(0, cut);
    auto it = table.find(key);
    if (it != table.end()) {
      const MemoEntry& e = it->second;
      if (e.kind == MemoEntry::kInfeasible) {
        ++memo_hits_;
        return;
      }
      if (e.kind == MemoEntry::kExact) {
        ++memo_hits_;
        if (g + e.value < incumbent_) adopt(cut, g + e.value, e.completion);
        return;
      }
      if (g + e.value >= incumbent_) {
        ++memo_hits_;
        return;
      }
    }
    const std::int64_t id_before = incumbent_id_;
    dfs(cursor, cut);
    if (aborted_) return;
    MemoEntry& e = table[key];
    if (incumbent_id_ != id_before) {
      e.kind = MemoEntry::kExact;
      e.value = incumbent_ - g;
      const int from = block_first_[static_cast<std::size_t>(cut) + 1];
      e.completion.clear();
      for (std::size_t i = static_cast<std::size_t>(from); i < order_.size(); ++i) {
        e.completion.push_back(incumbent_bits_[static_cast<std::size_t>(order_[i])]);
      }
    } else if (incumbent_ < kInf) {
      if (e.kind != MemoEntry::kExact) {
        e.kind = MemoEntry::kBound;
        e.value = std::max(e.value, incumbent_ - g);
      }
    } else {
      e.kind = MemoEntry::kInfeasible;
    }
  }

  void adopt(int cut, std::int64_t value, const std::vector<std::uint8_t>& completion) {
    incumbent_ = value;
    incumbent_bits_.assign(static_cast<std::size_t>(im_.n), 0);
    for (int v = 0; v < im_.n; ++v) incumbent_bits_[static_cast<std::size_t>(v)] = val_[static_cast<std::size_t>(v)] == 1 ? 1 : 0;
    const int from = block_first_[static_cast<std::size_t>(cut) + 1];
    for (std::size_t i = 0; i < completion.size(); ++i) {
      incumbent_bits_[static_cast<std::size_t>(order_[static_cast<std::size_t>(from) + i])] = completion[i];
    }
    ++incumbent_id_;
    record(false);
  }

  bool group_settled(int v) const {
    const int g = im_.group_of[static_cast<std::size_t>(v)];
    if (g < 0) return false;
    const auto& members = im_.groups[static_cast<std::size_t>(g)].members;
    auto member = [&](int x) { return std::find(members.begin(), members.end(), x) != members.end(); };
    for (int m : members) {
      if (val_[static_cast<std::size_t>(m)] >= 0) continue;
      if (pref_[static_cast<std::size_t>(m)] != Pref::kOne) return false;
      // Dynamic picks need not come cheapest first.
      if (im_.prim[static_cast<std::size_t>(m)] < im_.prim[static_cast<std::size_t>(v)]) return false;
      for (const Occ& o : im_.occ[static_cast<std::size_t>(m)]) {
        for (int x : im_.rows[static_cast<std::size_t>(o.row)].var) {
          if (val_[static_cast<std::size_t>(x)] < 0 && !member(x)) return false;
        }
      }
    }
    return true;
  }

  void branch(int v, int cursor, int cut_done, int block) {
    int first;
    switch (pref_[static_cast<std::size_t>(v)]) {
      case Pref::kOne: first = 1; break;
      case Pref::kCopy: {
        int src = copy_of_[static_cast<std::size_t>(v)];
        first = src >= 0 && val_[static_cast<std::size_t>(src)] == 1 && useful_[static_cast<std::size_t>(v)] != 0 ? 1 : 0;
        break;
      }
      default: first = 0; break;
    }
    // Members are tried cheapest first. When the group's rows mention no
    // other open variable, any later member leads to the same subtree at a
    // cost at least as high, so a feasible first pick settles the group.
    const bool settles = first == 1 && group_settled(v);
    const std::size_t mark = trail_.size();
    const std::size_t depth = open_bounds_.size();
    open_bounds_.push_back(total_lb_);
    for (int t = 0; t < 2 && !aborted_; ++t) {
      const int x = t == 0 ? first : 1 - first;
      if (t == 1) open_bounds_[depth] = kInf;
      assign(v, x);
      const bool feasible = propagate_queue();
      if (feasible && bound(block) < incumbent_) dfs(cursor, cut_done);
      undo_to(mark);
      if (t == 0 && settles && feasible) break;
    }
    open_bounds_.pop_back();
  }
};

// Clears store bits the chosen recomputation plan does not need, latest stage
// first, keeping every row satisfied.
void minimize_stores(const IlpModel& model, const IntModel& im, BitVec& a) {
  const Problem& P = *model.problem;
  std::vector<std::vector<int>> aux_of(static_cast<std::size_t>(im.n));
  for (int v = 0; v < im.n; ++v) {
    const VarInfo& info = model.vars[static_cast<std::size_t>(v)];
    if (info.kind != VarKind::kAux) continue;
    aux_of[static_cast<std::size_t>(model.s[static_cast<std::size_t>(info.stage)][static_cast<std::size_t>(info.pos - 1)])].push_back(v);
  }
  auto row_ok = [&](int r) {
    const IntRow& row = im.rows[static_cast<std::size_t>(r)];
    std::int64_t act = 0;
    for (std::size_t i = 0; i < row.var.size(); ++i) act += a[static_cast<std::size_t>(row.var[i])] != 0 ? row.a[i] : 0;
    return act <= row.rhs;
  };
  auto try_clear = [&](int v) {
    if (a[static_cast<std::size_t>(v)] == 0) return;
    std::vector<int> changed{v};
    a[static_cast<std::size_t>(v)] = 0;
    for (int x : aux_of[static_cast<std::size_t>(v)]) {
      if (a[static_cast<std::size_t>(x)] != 0) {
        a[static_cast<std::size_t>(x)] = 0;
        changed.push_back(x);
      }
    }
    bool ok = true;
    for (int x : changed) {
      for (const Occ& o : im.occ[static_cast<std::size_t>(x)]) ok = ok && row_ok(o.row);
    }
    if (!ok) {
      for (int x : changed) a[static_cast<std::size_t>(x)] = 1;
    }
  };
  for (int k = P.num_stages() - 1; k >= 0; --k) {
    for (int v : model.s[static_cast<std::size_t>(k)]) try_clear(v);
  }
  for (int v : model.sf) try_clear(v);
}

}  // namespace

SolveResult solve(const IlpModel& model, const SolveOptions& options) {
  if (!(options.time_limit > 0)) throw Error(ErrorCode::kInvalidArgument, "time limit must be positive");
  if (options.gap_target < 0 || options.gap_target >= 1) {
    throw Error(ErrorCode::kInvalidArgument, "gap target must lie in [0, 1)");
  }
  IntModel im = integerize(model);
  if (options.branch_order == BranchOrder::kFixedPriority) fix_unusable_stores(model, im);
  Search search(model, im, options);
  if (options.heuristics && !im.trivially_infeasible) {
    std::int64_t best = kInf;
    BitVec best_bits;
    for (const Schedule& cand : candidate_schedules(*model.problem)) {
      BitVec a;
      try {
        a = encode(model, cand);
      } catch (const Error&) {
        continue;
      }
      bool ok = true;
      for (std::size_t r = 0; ok && r < im.rows.size(); ++r) {
        const IntRow& row = im.rows[r];
        std::int64_t act = 0;
        for (std::size_t i = 0; i < row.var.size(); ++i) act += a[static_cast<std::size_t>(row.var[i])] != 0 ? row.a[i] : 0;
        ok = act <= row.rhs;
      }
      if (!ok) continue;
      std::int64_t value = 0;
      for (int v = 0; v < im.n; ++v) value += a[static_cast<std::size_t>(v)] != 0 ? im.cost[static_cast<std::size_t>(v)] : 0;
      if (value < best) {
        best = value;
        best_bits = std::move(a);
      }
    }
    if (best < kInf) search.seed(best_bits, best);
  }
  SolveResult res = search.run();
  if (res.has_solution()) minimize_stores(model, im, res.assignment);
  return res;
}

PropagationResult propagate(const PartialAssignment& partial, const IlpModel& model) {
  if (partial.size() != static_cast<std::size_t>(model.num_vars())) {
    throw Error(ErrorCode::kInvalidArgument, "partial assignment length does not match the model");
  }
  IntModel im = integerize(model);
  PropagationResult out;
  std::vector<std::int8_t> val(static_cast<std::size_t>(im.n), -1);
  for (int v = 0; v < im.n; ++v) {
    val[static_cast<std::size_t>(v)] = partial[static_cast<std::size_t>(v)];
    if (val[static_cast<std::size_t>(v)] < 0 && im.root_fixed[static_cast<std::size_t>(v)] >= 0) {
      val[static_cast<std::size_t>(v)] = im.root_fixed[static_cast<std::size_t>(v)];
      out.implied.emplace_back(v, val[static_cast<std::size_t>(v)]);
    }
  }
  if (im.trivially_infeasible) {
    out.pruned = true;
    return out;
  }
  bool changed = true;
  while (changed && !out.pruned) {
    changed = false;
    for (const IntRow& row : im.rows) {
      std::int64_t minact = 0;
      for (std::size_t i = 0; i < row.var.size(); ++i) {
        const int x = val[static_cast<std::size_t>(row.var[i])];
        minact += x == 1 ? row.a[i] : (x < 0 && row.a[i] < 0 ? row.a[i] : 0);
      }
      const std::int64_t slack = row.rhs - minact;
      if (slack < 0) {
        out.pruned = true;
        break;
      }
      for (std::size_t i = 0; i < row.var.size(); ++i) {
        const int v = row.var[i];
        if (val[static_cast<std::size_t>(v)] >= 0 || std::llabs(row.a[i]) <= slack) continue;
        val[static_cast<std::size_t>(v)] = row.a[i] > 0 ? 0 : 1;
        out.implied.emplace_back(v, val[static_cast<std::size_t>(v)]);
        changed = true;
      }
    }
  }
  return out;
}

Rational lower_bound(const PartialAssignment& partial, const IlpModel& model) {
  if (partial.size() != static_cast<std::size_t>(model.num_vars())) {
    throw Error(ErrorCode::kInvalidArgument, "partial assignment length does not match the model");
  }
  std::vector<Rational> cost(static_cast<std::size_t>(model.num_vars()));
  for (const Term& t : model.objective) cost[static_cast<std::size_t>(t.var)] += t.coef;
  auto at = [&](int v) { return partial[static_cast<std::size_t>(v)]; };
  auto group = [&](const std::vector<int>& members, bool active) {
    Rational chosen;
    bool any = false;
    for (int v : members) {
      if (at(v) == 1) {
        chosen += cost[static_cast<std::size_t>(v)];
        any = true;
      }
    }
    if (any) return chosen;
    if (!active) return Rational(0);
    std::optional<Rational> best;
    for (int v : members) {
      if (at(v) < 0 && (!best || cost[static_cast<std::size_t>(v)] < *best)) best = cost[static_cast<std::size_t>(v)];
    }
    return best.value_or(Rational(0));
  };
  Rational lb;
  for (const auto& g : model.df) lb += group(g, true);
  for (const auto& g : model.db) lb += group(g, true);
  for (std::size_t k = 0; k < model.dr.size(); ++k) {
    for (std::size_t p = 0; p < model.dr[k].size(); ++p) lb += group(model.dr[k][p], at(model.r[k][p]) == 1);
  }
  return lb;
}

std::string telemetry_jsonl(const SolveResult& result) {
  std::string out;
  for (const TelemetryPoint& pt : result.telemetry) {
    nlohmann::json j;
    j["elapsed_ms"] = pt.elapsed_ms;
    j["incumbent"] = pt.incumbent ? nlohmann::json(pt.incumbent->to_double()) : nlohmann::json(nullptr);
    j["bound"] = pt.bound.to_double();
    j["gap"] = pt.gap ? nlohmann::json(*pt.gap) : nlohmann::json(nullptr);
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace ckptopt
