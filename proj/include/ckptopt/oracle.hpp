// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ckptopt/problem.hpp"
#include "ckptopt/schedule.hpp"
#include "ckptopt/solver.hpp"

namespace ckptopt {

struct OracleOptions {
  bool inplace = false;
  int max_nodes = 6;
  int max_variants = 2;
  int max_schedules = 8;  // optimal schedules listed
};

struct OracleSchedule {
  Schedule schedule;
  Bytes bound_peak = 0;  // largest modeled memory expression
  Bytes true_peak = 0;   // same with exact local sets
};

struct OracleResult {
  bool feasible = false;
  Rational optimum;
  std::vector<OracleSchedule> optimal_schedules;
  std::uint64_t enumerated_count = 0;  // feasible complete schedules
  bool count_saturated = false;
  std::uint64_t transitions = 0;       // candidate stage decisions examined
};

/// Exhaustive search over every schedule of a small problem. Throws
/// Error(kCapExceeded) beyond the node or variant cap.
OracleResult enumerate(const Problem& problem, Bytes budget, const OracleOptions& options = {});

struct Judgement {
  bool feasible = false;
  std::vector<std::string> reasons;  // first violation per rule family
  Rational cost;
};

/// Feasibility of a schedule under the modeled memory expressions and the
/// structural rules, computed without the ILP.
Judgement judge(const Problem& problem, const Schedule& schedule, Bytes budget, bool inplace);

/// Visits schedules of the unfiltered decision space (every store row,
/// recomputation set, variant and in-place choice). When the space holds
/// more than `limit` schedules, evenly spaced ones are taken. Returns the
/// number visited.
std::uint64_t for_each_candidate(const Problem& problem, bool inplace, std::uint64_t limit,
                                 const std::function<void(const Schedule&)>& visit);

/// Size of the unfiltered decision space (approximate when huge).
double candidate_space_size(const Problem& problem, bool inplace);

struct CrossCheckRow {
  Bytes budget = 0;
  bool oracle_feasible = false;
  Rational oracle_optimum;
  std::uint64_t enumerated_count = 0;
  SolveStatus status = SolveStatus::kTimeoutNoIncumbent;
  Rational solver_objective;
  bool solver_schedule_feasible = false;  // under judge()
  bool match = false;
  std::string counterexample;             // schedule document on mismatch
};

struct CrossCheckReport {
  std::vector<CrossCheckRow> rows;
  bool all_pass = true;
};

struct CrossCheckOptions {
  OracleOptions oracle;
  SolveOptions solve;
  Bytes memory_rhs_delta = 0;  // perturbs the model's memory rows; 0 in normal use
};

CrossCheckReport cross_check(const Problem& problem, const std::vector<Bytes>& budgets,
                             const CrossCheckOptions& options = {});

std::string cross_check_json(const CrossCheckReport& report);

}  // namespace ckptopt
