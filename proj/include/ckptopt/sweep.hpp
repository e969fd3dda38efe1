// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ckptopt/costmodel.hpp"
#include "ckptopt/schedule.hpp"
#include "ckptopt/solver.hpp"

namespace ckptopt {

struct SweepOptions {
  std::vector<Bytes> budgets;
  std::vector<AblationMode> modes{AblationMode::kAll};
  BoundKind bound_kind = BoundKind::kUpper;
  bool inplace = false;
  SolveOptions solve;
  int threads = 1;  // cells run concurrently; each cell is solved single-threaded
};

struct SweepCell {
  Bytes budget = 0;
  AblationMode mode = AblationMode::kAll;
  SolveStatus status = SolveStatus::kTimeoutNoIncumbent;
  std::optional<Rational> objective;
  Rational lower_bound;
  std::optional<Bytes> simulated_peak;
  std::optional<Schedule> schedule;
  std::string error;  // set when the cell could not be built
};

struct SweepResult {
  Rational baseline_cost;  // store-everything objective with default variants
  Bytes baseline_peak = 0;
  std::vector<SweepCell> cells;  // budget-major, modes in option order
};

/// Solves every (budget, mode) cell. Throws Error(kInvalidArgument) on an
/// empty budget or mode list; per-cell failures are recorded in the cell.
SweepResult sweep(const ComputationGraph& g, const ImplementationCatalog& catalog, const SweepOptions& options);

/// Overhead of `cost` relative to the baseline, in percent.
double overhead_percent(const Rational& cost, const Rational& baseline);

/// Columns: budget, mode, status, objective, simulated_peak,
/// overhead_vs_store_everything_%.
std::string sweep_csv(const SweepResult& result);

}  // namespace ckptopt
