// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/sweep.hpp"

#include <atomic>
#include <thread>

#include "ckptopt/ilp.hpp"

namespace ckptopt {

namespace {

void solve_cell(const ComputationGraph& g, const ImplementationCatalog& catalog, const SweepOptions& options,
                SweepCell& cell) {
  try {
    Problem problem = build_problem(g, catalog, cell.mode, options.bound_kind);
    IlpOptions io;
    io.bound_kind = options.bound_kind;
    io.inplace = options.inplace;
    io.ablation = cell.mode;
    IlpModel model = build_model(problem, cell.budget, io);
    SolveResult r = solve(model, options.solve);
    cell.status = r.status;
    cell.lower_bound = r.lower_bound;
    if (!r.has_solution()) return;
    Schedule s = decode(model, r.assignment);
    SimulationTrace trace = simulate(s, problem);
    cell.objective = r.objective;
    cell.simulated_peak = trace.peak;
    cell.schedule = std::move(s);
  } catch (const Error& e) {
    cell.error = e.what();
  }
}

}  // namespace

SweepResult sweep(const ComputationGraph& g, const ImplementationCatalog& catalog, const SweepOptions& options) {
  if (options.budgets.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one budget");
  if (options.modes.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one ablation mode");
  SweepResult res;
  {
    Problem base = build_problem(g, catalog, AblationMode::kNone, options.bound_kind);
    SimulationTrace trace = simulate(store_everything(base), base);
    res.baseline_cost = trace.total_cost;
    res.baseline_peak = trace.peak;
  }
  for (Bytes b : options.budgets) {
    for (AblationMode m : options.modes) {
      SweepCell c;
      c.budget = b;
      c.mode = m;
      res.cells.push_back(std::move(c));
    }
  }
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(res.cells.size())));
  if (threads == 1) {
    for (SweepCell& c : res.cells) solve_cell(g, catalog, options, c);
    return res;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < res.cells.size(); i = next++) solve_cell(g, catalog, options, res.cells[i]);
    });
  }
  for (std::thread& t : pool) t.join();
  return res;
}

double overhead_percent(const Rational& cost, const Rational& baseline) {
  if (baseline == Rational(0)) return 0.0;
  return ((cost - baseline) / baseline).to_double() * 100.0;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "budget,mode,status,objective,simulated_peak,overhead_vs_store_everything_%\n";
  for (const SweepCell& c : result.cells) {
    out += std::to_string(c.budget) + ",";
    out += to_string(c.mode);
    out += ",";
    out += c.error.empty() ? to_string(c.status) : "error";
    out += ",";
    if (c.objective) out += c.objective->to_decimal(6);
    out += ",";
    if (c.simulated_peak) out += std::to_string(*c.simulated_peak);
    out += ",";
    if (c.objective && result.baseline_cost != Rational(0)) {
      out += ((*c.objective - result.baseline_cost) / result.baseline_cost * Rational(100)).to_decimal(4);
    }
    out += "\n";
  }
  return out;
}

}  // namespace ckptopt
