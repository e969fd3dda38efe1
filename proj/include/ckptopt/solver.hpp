// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckptopt/ilp.hpp"

namespace ckptopt {

enum class BranchOrder { kPaperOrder, kMostFractional, kFixedPriority };

const char* to_string(BranchOrder order);
BranchOrder parse_branch_order(const std::string& text);

struct SolveOptions {
  double time_limit = 60.0;      // seconds
  double gap_target = 0.0;       // stop once (incumbent - bound) / incumbent <= gap_target
  BranchOrder branch_order = BranchOrder::kFixedPriority;
  std::uint64_t seed = 0;        // reserved; the search itself is deterministic
  std::int64_t node_limit = 0;   // 0 = unlimited; a deterministic alternative to the clock
  bool heuristics = true;        // seed the search with simple checkpointing plans
};

enum class SolveStatus { kOptimal, kFeasibleGap, kInfeasible, kTimeoutNoIncumbent };

const char* to_string(SolveStatus status);

struct TelemetryPoint {
  double elapsed_ms = 0;
  std::optional<Rational> incumbent;
  Rational bound;
  std::optional<double> gap;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kTimeoutNoIncumbent;
  BitVec assignment;       // empty without an incumbent
  Rational objective;      // meaningful with an incumbent
  Rational lower_bound;
  int recomputations = 0;
  std::int64_t nodes = 0;
  std::int64_t memo_hits = 0;
  std::vector<TelemetryPoint> telemetry;

  bool has_solution() const { return !assignment.empty(); }
  std::optional<double> gap() const;
};

SolveResult solve(const IlpModel& model, const SolveOptions& options = {});

/// Partial assignment: -1 unassigned, otherwise 0 or 1.
using PartialAssignment = std::vector<std::int8_t>;

struct PropagationResult {
  bool pruned = false;
  std::vector<std::pair<int, int>> implied;  // (variable, value) in derivation order
};

/// Bound propagation over all rows until fixpoint. Fixed-zero variables are
/// treated as assigned.
PropagationResult propagate(const PartialAssignment& partial, const IlpModel& model);

/// Objective bound: fixed choices plus the cheapest open choice of each
/// active one-hot group.
Rational lower_bound(const PartialAssignment& partial, const IlpModel& model);

/// Telemetry as one JSON object per line.
std::string telemetry_jsonl(const SolveResult& result);

}  // namespace ckptopt
