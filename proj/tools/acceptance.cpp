// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run. Prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails. The whole suite runs twice and every schedule,
// trace, LP export and sweep CSV of the two runs is compared byte for byte.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ckptopt/costmodel.hpp"
#include "ckptopt/graph.hpp"
#include "ckptopt/ilp.hpp"
#include "ckptopt/memmodel.hpp"
#include "ckptopt/oracle.hpp"
#include "ckptopt/problem.hpp"
#include "ckptopt/schedule.hpp"
#include "ckptopt/solver.hpp"
#include "ckptopt/sweep.hpp"

namespace ckptopt {
namespace {

constexpr Bytes kMiB = 1 << 20;

// ---- pinned parameters ------------------------------------------------------

// Criterion 1: at least this many instances, within this many seconds.
constexpr int kMinSuiteInstances = 50;
constexpr double kSuiteSeconds = 120.0;
// Activation unit of the generated suite; large enough that mask
// intermediates (1/32 of an activation) have nonzero size.
constexpr Bytes kSuiteUnit = 32;

// Criterion 3: random oracle instances and the number of candidate schedules
// checked on each.
constexpr int kEquivalenceInstances = 10;
constexpr std::uint64_t kEquivalenceCandidates = 20000;

// Criterion 4: chain-16 budgets in bytes; 0 stands for an unbounded budget.
const std::vector<Bytes> kMonotoneBudgets{9, 11, 12, 14, 16, 0};

// Criterion 5: a full extra forward pass of the 16-node unit chain costs 16.
constexpr int kSqrtChain = 16;
constexpr int kSqrtAnalog = 6;
// Regression values: objective at the pinned budget for chain-16 and for its
// oracle-sized analog.
const Rational kSqrtChainObjective(37);
const Rational kSqrtAnalogObjective(12);

// Criterion 6 and 7: resnet_toy budgets and the per-solve node allowance.
const std::vector<Bytes> kResnetBudgets{32 * kMiB, 28 * kMiB, 24 * kMiB, 20 * kMiB};
constexpr std::int64_t kResnetNodeLimit = 1000000;
constexpr double kMinMemoryReduction = 2.0;

// Solves that must finish: generous clock, deterministic search.
constexpr double kExactTimeLimit = 3600.0;

// ---- helpers -------------------------------------------------------------------

std::string fixture(const std::string& name) { return std::string(CKPTOPT_FIXTURES) + "/" + name; }

struct Instance {
  std::string name;
  ComputationGraph graph;
  ImplementationCatalog catalog;
};

Instance generated(GraphKind kind, int n, int variants, std::uint64_t seed, Bytes unit) {
  GenOptions go;
  go.kind = kind;
  go.n = n;
  go.variants = variants;
  go.seed = seed;
  go.unit_bytes = unit;
  auto [g, c] = generate_synthetic(go);
  std::string name = std::string(to_string(kind)) + "-" + std::to_string(n) + "-v" + std::to_string(variants) + "-s" +
                     std::to_string(seed);
  return {name, std::move(g), std::move(c)};
}

Instance from_fixture(const std::string& stem) {
  ComputationGraph g = load_graph_file(fixture(stem + ".graph.json"));
  ImplementationCatalog c = load_catalog_file(fixture(stem + ".catalog.json"), g);
  return {stem, std::move(g), std::move(c)};
}

struct Solved {
  SolveResult result;
  std::optional<Schedule> schedule;
  std::optional<SimulationTrace> trace;
};

/// Everything criterion 2 checks about one solver schedule.
struct Executed {
  std::string label;
  Bytes budget = 0;
  Rational objective;
  Rational simulated_cost;
  Bytes simulated_peak = 0;
};

/// Bytes compared between the two runs.
using Artifacts = std::map<std::string, std::string>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Run {
  Artifacts artifacts;
  std::vector<Executed> executed;
  std::map<int, Outcome> outcomes;
  std::string sweep_csv;  // resnet_toy, compared against the golden file
};

Solved solve_at(const Problem& problem, Bytes budget, bool inplace, const SolveOptions& so, const std::string& label,
                Run& run) {
  IlpOptions io;
  io.inplace = inplace;
  io.ablation = problem.mode;
  io.bound_kind = problem.sets.bound_kind;
  IlpModel model = build_model(problem, budget, io);
  Solved out;
  out.result = solve(model, so);
  if (out.result.has_solution()) {
    Schedule s = decode(model, out.result.assignment);
    SimulationTrace t = simulate(s, problem);
    run.executed.push_back({label, budget, out.result.objective, t.total_cost, t.peak});
    run.artifacts["schedule/" + label] = serialize_schedule(s);
    run.artifacts["trace/" + label] = trace_report(t, TraceFormat::kCsv);
    out.schedule = std::move(s);
    out.trace = std::move(t);
  }
  return out;
}

SolveOptions exact_options() {
  SolveOptions so;
  so.time_limit = kExactTimeLimit;
  return so;
}

Rational min_cost_sum(const Problem& p) {
  Rational total;
  for (int pos = 1; pos <= p.num_tensors(); ++pos) {
    Rational best = p.fwd_variants(pos).front().cost;
    for (const FwdVariant& v : p.fwd_variants(pos)) best = std::min(best, v.cost);
    total += best;
  }
  for (const auto& stage : p.bwd) {
    Rational best = stage.front().cost;
    for (const BwdVariant& v : stage) best = std::min(best, v.cost);
    total += best;
  }
  return total;
}

/// Smallest budget in [0, hi] at which `feasible` holds; `hi` must be feasible.
Bytes smallest_feasible(Bytes hi, const std::function<bool(Bytes)>& feasible) {
  Bytes lo = 0;
  if (feasible(lo)) return lo;
  while (hi - lo > 1) {
    Bytes mid = lo + (hi - lo) / 2;
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

Bytes store_everything_peak(const Problem& p) { return simulate(store_everything(p), p).peak; }

// ---- criterion 1: oracle exactness -------------------------------------------------

struct SuiteEntry {
  Instance inst;
  bool inplace = false;
};

std::vector<SuiteEntry> oracle_suite() {
  std::vector<SuiteEntry> out;
  for (int n = 3; n <= 6; ++n) {
    for (int v = 1; v <= 2; ++v) {
      for (bool inplace : {false, true}) out.push_back({generated(GraphKind::kChain, n, v, 0, kSuiteUnit), inplace});
    }
  }
  for (int n = 4; n <= 6; ++n) {
    for (int v = 1; v <= 2; ++v) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        for (bool inplace : {false, true}) {
          out.push_back({generated(GraphKind::kResidual, n, v, seed, kSuiteUnit), inplace});
        }
      }
    }
  }
  return out;
}

/// Smallest oracle-feasible budget, the store-everything peak and their
/// midpoint. A repeated budget is replaced by one byte below the smallest
/// feasible budget, which the oracle and the solver must both reject.
std::vector<Bytes> suite_budgets(const Problem& p, bool inplace) {
  OracleOptions oo;
  oo.inplace = inplace;
  oo.max_schedules = 1;
  const Bytes hi = store_everything_peak(p);
  const Bytes lo = smallest_feasible(hi, [&](Bytes b) { return enumerate(p, b, oo).feasible; });
  std::vector<Bytes> out{lo, lo + (hi - lo) / 2, hi};
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (std::find(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(i), out[i]) !=
        out.begin() + static_cast<std::ptrdiff_t>(i)) {
      out[i] = lo - 1;
    }
  }
  return out;
}

void criterion_oracle(Run& run) {
  const auto t0 = std::chrono::steady_clock::now();
  int instances = 0;
  int rows = 0;
  std::vector<std::string> failures;
  for (const SuiteEntry& e : oracle_suite()) {
    Problem p = build_problem(e.inst.graph, e.inst.catalog);
    const std::vector<Bytes> budgets = suite_budgets(p, e.inplace);
    CrossCheckOptions co;
    co.oracle.inplace = e.inplace;
    co.solve = exact_options();
    CrossCheckReport rep = cross_check(p, budgets, co);
    ++instances;
    const std::string tag = e.inst.name + (e.inplace ? "-inplace" : "");
    run.artifacts["oracle/" + tag] = cross_check_json(rep);
    for (const CrossCheckRow& r : rep.rows) {
      ++rows;
      if (!r.match || (r.oracle_feasible && !r.solver_schedule_feasible)) {
        failures.push_back(tag + " budget " + std::to_string(r.budget));
      }
    }
    // The same solves feed criterion 2.
    for (Bytes b : budgets) solve_at(p, b, e.inplace, co.solve, tag + "@" + std::to_string(b), run);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream d;
  d << instances << " instances, " << rows << " budgets, " << failures.size() << " mismatches";
  if (!failures.empty()) d << " (first: " << failures.front() << ")";
  run.outcomes[1] = {instances >= kMinSuiteInstances && failures.empty(), d.str()};
  run.outcomes[101] = {secs < kSuiteSeconds, std::to_string(static_cast<int>(std::lround(secs))) + " s"};
}

// ---- criterion 3: linearization and model/evaluator agreement ------------------------------------

/// Every product variable's three rows admit exactly alpha = x * y for each
/// of the four factor combinations.
bool linearization_exact(const IlpModel& model, int& products) {
  std::map<std::string, std::vector<const LinearConstraint*>> rows;
  for (const LinearConstraint& c : model.constraints) {
    if (c.tag != "linearization") continue;
    const std::string key = c.name.substr(0, c.name.rfind('_'));
    rows[key].push_back(&c);
  }
  for (int v = 0; v < model.num_vars(); ++v) {
    const VarInfo& info = model.vars[static_cast<std::size_t>(v)];
    if (info.kind != VarKind::kAux) continue;
    ++products;
    const int x = model.db[static_cast<std::size_t>(info.stage)][static_cast<std::size_t>(info.variant)];
    const int y = model.s[static_cast<std::size_t>(info.stage)][static_cast<std::size_t>(info.pos - 1)];
    const auto& mine = rows["Lin_" + info.name];
    if (mine.size() != 3) return false;
    for (int xv = 0; xv <= 1; ++xv) {
      for (int yv = 0; yv <= 1; ++yv) {
        for (int av = 0; av <= 1; ++av) {
          bool ok = true;
          for (const LinearConstraint* c : mine) {
            Rational lhs = c->constant;
            for (const Term& t : c->terms) {
              const int val = t.var == v ? av : t.var == x ? xv : t.var == y ? yv : -1;
              if (val < 0) return false;  // a row mentioning anything else
              if (val == 1) lhs += t.coef;
            }
            ok = ok && (c->sense == Sense::kLe ? lhs <= c->rhs : c->sense == Sense::kGe ? lhs >= c->rhs : lhs == c->rhs);
          }
          if (ok != (av == xv * yv)) return false;
        }
      }
    }
  }
  return true;
}

void criterion_linearization(Run& run) {
  int products = 0;
  bool exact = true;
  for (const char* stem : {"residual8", "chain16v2"}) {
    Instance inst = from_fixture(stem);
    Problem p = build_problem(inst.graph, inst.catalog);
    IlpOptions io;
    io.inplace = true;
    exact = exact && linearization_exact(build_model(p, store_everything_peak(p), io), products);
  }

  // Random oracle instances: every candidate schedule gets the same verdict
  // and cost from the model and from the memory-model evaluators.
  std::uint64_t checked = 0;
  std::uint64_t disagreements = 0;
  std::uint64_t feasible_seen = 0;
  std::string first;
  std::mt19937_64 rng(20260);
  for (int i = 0; i < kEquivalenceInstances; ++i) {
    const bool residual = (rng() & 1) != 0;
    const int n = residual ? 3 + static_cast<int>(rng() % 3) : 3 + static_cast<int>(rng() % 4);
    const int variants = 1 + static_cast<int>(rng() % 2);
    const bool inplace = (rng() & 1) != 0;
    Instance inst = generated(residual ? GraphKind::kResidual : GraphKind::kChain, n, variants, rng() % 100, kSuiteUnit);
    Problem p = build_problem(inst.graph, inst.catalog);
    OracleOptions oo;
    oo.inplace = inplace;
    oo.max_schedules = 1;
    const Bytes hi = store_everything_peak(p);
    const Bytes lo = smallest_feasible(hi, [&](Bytes b) { return enumerate(p, b, oo).feasible; });
    const Bytes budget = lo + (hi - lo) / 3;
    IlpOptions io;
    io.inplace = inplace;
    IlpModel model = build_model(p, budget, io);
    for_each_candidate(p, inplace, kEquivalenceCandidates, [&](const Schedule& s) {
      ++checked;
      Judgement j = judge(p, s, budget, inplace);
      BitVec a;
      try {
        a = encode(model, s);
      } catch (const Error&) {
        if (j.feasible) {  // outside the model's variable space must be infeasible
          ++disagreements;
          if (first.empty()) first = inst.name + ": encode rejected a judged-feasible schedule";
        }
        return;
      }
      Evaluation ev = evaluate_assignment(model, a);
      const bool agree = ev.feasible == j.feasible && (!ev.feasible || ev.objective == j.cost);
      if (ev.feasible) ++feasible_seen;
      if (!agree) {
        ++disagreements;
        if (first.empty()) first = inst.name + ": " + serialize_schedule(s);
      }
    });
  }
  std::ostringstream d;
  d << products << " products exact=" << (exact ? "yes" : "no") << "; " << checked << " assignments on "
    << kEquivalenceInstances << " instances (" << feasible_seen << " feasible), " << disagreements << " disagreements";
  if (!first.empty()) d << " (first: " << first.substr(0, first.find('\n')) << ")";
  run.outcomes[3] = {exact && products > 0 && disagreements == 0 && feasible_seen > 0, d.str()};
}

// ---- criterion 4: budget monotonicity -------------------------------------------------------

void criterion_monotone(Run& run) {
  Instance inst = from_fixture("chain16v2");
  Problem p = build_problem(inst.graph, inst.catalog);
  SweepOptions so;
  const Bytes unbounded = store_everything_peak(p) * 4;
  for (Bytes b : kMonotoneBudgets) so.budgets.push_back(b == 0 ? unbounded : b);
  so.solve = exact_options();
  SweepResult r = sweep(inst.graph, inst.catalog, so);
  run.artifacts["sweep/chain16v2"] = sweep_csv(r);
  bool ok = true;
  std::ostringstream d;
  std::optional<Rational> prev;
  for (const SweepCell& c : r.cells) {
    d << (c.budget == unbounded ? std::string("inf") : std::to_string(c.budget)) << ":"
      << (c.objective ? c.objective->str() : to_string(c.status)) << " ";
    ok = ok && c.status == SolveStatus::kOptimal && c.objective.has_value();
    if (c.objective && prev) ok = ok && *c.objective <= *prev;
    if (c.objective) prev = c.objective;
    if (c.schedule) {
      Problem cp = build_problem(inst.graph, inst.catalog, c.mode);
      SimulationTrace t = simulate(*c.schedule, cp);
      const std::string label = "chain16v2@" + std::to_string(c.budget);
      run.executed.push_back({label, c.budget, *c.objective, t.total_cost, t.peak});
      run.artifacts["schedule/" + label] = serialize_schedule(*c.schedule);
      run.artifacts["trace/" + label] = trace_report(t, TraceFormat::kCsv);
    }
  }
  const Rational floor = min_cost_sum(p);
  const bool floor_ok = !r.cells.empty() && r.cells.back().objective && *r.cells.back().objective == floor;
  d << "unbounded=" << floor.str() << " expected";
  run.outcomes[4] = {ok && floor_ok, d.str()};
  IlpOptions io;
  run.artifacts["lp/chain16v2@11"] = export_lp(build_model(p, 11, io));
}

// ---- criterion 5: square-root checkpointing --------------------------------------------------

struct SqrtOutcome {
  Bytes live_set = 0;
  Bytes budget = 0;
  Rational objective;
  Rational extra;
};

/// Budget: the smallest budget any schedule fits in (the constant live set)
/// plus 2 * ceil(sqrt(n)) unit checkpoints.
SqrtOutcome sqrt_case(int n, Run& run, bool with_oracle, bool& oracle_agrees) {
  Instance inst = generated(GraphKind::kChain, n, 1, 0, 1);
  Problem p = build_problem(inst.graph, inst.catalog);
  IlpOptions io;
  SolveOptions so = exact_options();
  SqrtOutcome out;
  out.live_set = smallest_feasible(store_everything_peak(p), [&](Bytes b) {
    return solve(build_model(p, b, io), so).status != SolveStatus::kInfeasible;
  });
  out.budget = out.live_set + 2 * static_cast<Bytes>(std::ceil(std::sqrt(static_cast<double>(n))));
  Solved s = solve_at(p, out.budget, false, so, "chain" + std::to_string(n) + "-sqrt", run);
  out.objective = s.result.objective;
  out.extra = out.objective - min_cost_sum(p);
  if (with_oracle) {
    OracleResult o = enumerate(p, out.budget);
    oracle_agrees = o.feasible && o.optimum == out.objective && s.result.status == SolveStatus::kOptimal;
  }
  return out;
}

void criterion_sqrt(Run& run) {
  bool analog_oracle = false;
  bool unused = true;
  SqrtOutcome analog = sqrt_case(kSqrtAnalog, run, true, analog_oracle);
  SqrtOutcome big = sqrt_case(kSqrtChain, run, false, unused);
  std::ostringstream d;
  d << "chain-16 budget " << big.budget << " (live set " << big.live_set << "): objective " << big.objective.str()
    << ", recomputation " << big.extra.str() << " <= 16; chain-6 budget " << analog.budget << ": objective "
    << analog.objective.str() << " oracle " << (analog_oracle ? "agrees" : "DISAGREES");
  const bool ok = big.extra <= Rational(kSqrtChain) && big.objective == kSqrtChainObjective && analog_oracle &&
                  analog.objective == kSqrtAnalogObjective;
  run.outcomes[5] = {ok, d.str()};
}

// ---- criteria 6 and 7: resnet_toy ablation sweep ---------------------------------------------

void criterion_resnet(Run& run) {
  Instance inst = from_fixture("resnet_toy");
  SweepOptions so;
  so.budgets = kResnetBudgets;
  so.modes = {AblationMode::kNone, AblationMode::kConv, AblationMode::kOut, AblationMode::kAll};
  so.solve.time_limit = kExactTimeLimit;
  so.solve.node_limit = kResnetNodeLimit;
  SweepResult r = sweep(inst.graph, inst.catalog, so);
  run.sweep_csv = sweep_csv(r);
  run.artifacts["sweep/resnet_toy"] = run.sweep_csv;

  // Criterion 6: per budget, the joint mode is at least as cheap as each
  // single mode, and finds a schedule whenever any mode does.
  bool dominance = true;
  int compared = 0;
  std::map<Bytes, std::optional<Rational>> all_by_budget;
  for (const SweepCell& c : r.cells) {
    if (c.mode == AblationMode::kAll) all_by_budget[c.budget] = c.objective;
  }
  std::ostringstream d6;
  for (const SweepCell& c : r.cells) {
    if (!c.error.empty()) dominance = false;
    if (c.schedule) {
      Problem cp = build_problem(inst.graph, inst.catalog, c.mode);
      SimulationTrace t = simulate(*c.schedule, cp);
      const std::string label = std::string("resnet_toy-") + to_string(c.mode) + "@" + std::to_string(c.budget);
      run.executed.push_back({label, c.budget, *c.objective, t.total_cost, t.peak});
      run.artifacts["schedule/" + label] = serialize_schedule(*c.schedule);
      run.artifacts["trace/" + label] = trace_report(t, TraceFormat::kCsv);
    }
    if (c.mode == AblationMode::kAll || !c.objective) continue;
    ++compared;
    const auto& all = all_by_budget[c.budget];
    if (!all || *all > *c.objective) {
      dominance = false;
      d6 << " violated at " << c.budget << " vs " << to_string(c.mode);
    }
  }
  d6 << " " << compared << " comparisons;";
  for (const auto& [b, o] : all_by_budget) d6 << " " << b / kMiB << "MiB:" << (o ? o->to_decimal(2) : "none");
  run.outcomes[6] = {dominance && compared > 0, d6.str().substr(1)};

  // Criterion 7: the joint mode's curve never rises as the budget grows and
  // reaches more than a twofold cut in simulated peak.
  bool monotone = true;
  std::optional<Rational> prev;
  double best_reduction = 0;
  Rational cost_at_best;
  for (auto it = all_by_budget.rbegin(); it != all_by_budget.rend(); ++it) {
    if (!it->second) {
      monotone = monotone && !prev;  // a gap may only appear below every solved budget
      continue;
    }
    if (prev && *it->second < *prev) monotone = false;
    prev = it->second;
  }
  for (const SweepCell& c : r.cells) {
    if (c.mode != AblationMode::kAll || !c.simulated_peak) continue;
    const double red = static_cast<double>(r.baseline_peak) / static_cast<double>(*c.simulated_peak);
    if (red > best_reduction) {
      best_reduction = red;
      cost_at_best = *c.objective;
    }
  }
  std::string golden;
  bool golden_ok = false;
  try {
    golden = read_text_file(fixture("golden/resnet_toy_sweep.csv"));
    golden_ok = golden == run.sweep_csv;
  } catch (const Error&) {
  }
  std::ostringstream d7;
  d7.setf(std::ios::fixed);
  d7.precision(2);
  d7 << "store-everything " << r.baseline_peak << " B at cost " << r.baseline_cost.to_decimal(2) << "; best cut "
     << best_reduction << "x at cost " << cost_at_best.to_decimal(2) << "; curve "
     << (monotone ? "monotone" : "NOT monotone") << "; golden " << (golden_ok ? "matches" : "differs or missing");
  run.outcomes[7] = {monotone && best_reduction > kMinMemoryReduction && golden_ok, d7.str()};

  IlpOptions io;
  Problem p = build_problem(inst.graph, inst.catalog);
  run.artifacts["lp/resnet_toy@24MiB"] = export_lp(build_model(p, 24 * kMiB, io));
}

void criterion_agreement(Run& run) {
  int bad = 0;
  std::string first;
  for (const Executed& e : run.executed) {
    if (e.simulated_cost != e.objective || e.simulated_peak > e.budget) {
      if (first.empty()) first = e.label;
      ++bad;
    }
  }
  std::string d = std::to_string(run.executed.size()) + " schedules, " + std::to_string(bad) + " disagreements";
  if (!first.empty()) d += " (first: " + first + ")";
  run.outcomes[2] = {bad == 0 && !run.executed.empty(), d};
}

Run run_suite() {
  Run run;
  Instance chain3 = from_fixture("chain3");
  Problem p3 = build_problem(chain3.graph, chain3.catalog);
  run.artifacts["lp/chain3@1024"] = export_lp(build_model(p3, 1024, IlpOptions{}));
  criterion_oracle(run);
  criterion_linearization(run);
  criterion_monotone(run);
  criterion_sqrt(run);
  criterion_resnet(run);
  criterion_agreement(run);
  return run;
}

const char* kClaims =
    "  Not reproduced: published absolute memory savings, compute overheads and per-network memory\n"
    "  figures rest on measured GPU operator profiles, and published solve times on a commercial MILP\n"
    "  solver. This build has synthetic cost profiles and its own branch-and-bound, so only the shape\n"
    "  of the tradeoff is checked.";

}  // namespace
}  // namespace ckptopt

int main(int argc, char** argv) {
  using namespace ckptopt;
  CLI::App app{"Acceptance criteria for ckptopt"};
  std::string out_dir;
  bool write_goldens = false;
  app.add_option("--out", out_dir, "Directory receiving the first run's artifacts");
  app.add_flag("--write-goldens", write_goldens, "Store the resnet_toy sweep as the new golden file");
  CLI11_PARSE(app, argc, argv);

  try {
    Run first = run_suite();
    if (write_goldens) {
      std::filesystem::create_directories(fixture("golden"));
      write_text_file(fixture("golden/resnet_toy_sweep.csv"), first.sweep_csv);
      std::cout << "wrote " << fixture("golden/resnet_toy_sweep.csv") << "\n";
    }
    if (!out_dir.empty()) {
      for (const auto& [name, bytes] : first.artifacts) {
        std::filesystem::path path = std::filesystem::path(out_dir) / name;
        std::filesystem::create_directories(path.parent_path());
        write_text_file(path.string(), bytes);
      }
    }
    Run second = run_suite();
    int differing = 0;
    std::string first_diff;
    for (const auto& [name, bytes] : first.artifacts) {
      auto it = second.artifacts.find(name);
      if (it == second.artifacts.end() || it->second != bytes) {
        if (first_diff.empty()) first_diff = name;
        ++differing;
      }
    }
    if (second.artifacts.size() != first.artifacts.size()) ++differing;
    first.outcomes[8] = {differing == 0, std::to_string(first.artifacts.size()) + " artifacts, " +
                                             std::to_string(differing) + " differ" +
                                             (first_diff.empty() ? "" : " (first: " + first_diff + ")")};

    bool all = true;
    const Outcome& timing = first.outcomes[101];
    for (int c = 1; c <= 8; ++c) {
      Outcome o = first.outcomes[c];
      if (c == 1) {
        o.pass = o.pass && timing.pass;
        o.detail += ", " + timing.detail;
      }
      if (c == 7) o.detail = "absolute published results not reproduced (see below); " + o.detail;
      all = all && o.pass;
      std::printf("criterion %d: %s  %s\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str());
      if (c == 7) std::printf("%s\n", kClaims);
    }
    return all ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
