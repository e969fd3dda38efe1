// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ckptopt/ilp.hpp"
#include "ckptopt/problem.hpp"

namespace ckptopt {

/// Work done before and during one backward stage.
struct StagePlan {
  int node = 0;
  std::string backward_impl;
  std::vector<std::pair<int, std::string>> recompute;  // (position, impl), ascending positions
  BitVec store;                                        // held during the backward call
  std::vector<int> inplace;                            // recomputed positions written over their input
};

struct Schedule {
  std::vector<std::string> tensors;          // labels, index p - 1
  BitVec forward_store;                      // kept after the forward pass
  std::vector<std::string> forward_impl;     // per position
  std::vector<StagePlan> stages;             // execution order
};

std::string serialize_schedule(const Schedule& s);
Schedule parse_schedule(const std::string& document);

/// Human-readable violations; empty iff the schedule can be executed.
std::vector<std::string> validate(const Schedule& s, const Problem& problem);

struct TraceStep {
  std::string op;
  Bytes before = 0;
  Bytes peak = 0;
  Bytes after = 0;
  Rational cost;
};

struct SimulationTrace {
  std::vector<TraceStep> steps;
  Bytes peak = 0;
  Rational total_cost;
};

/// Executes the schedule with exact byte accounting. Throws Error(kValidation)
/// when validate() reports violations.
SimulationTrace simulate(const Schedule& s, const Problem& problem);

enum class TraceFormat { kCsv, kJson };
std::string trace_report(const SimulationTrace& trace, TraceFormat format);

/// Default variants, no recomputation, every backward dependency kept.
Schedule store_everything(const Problem& problem);

/// Reads a schedule out of a 0/1 assignment of the model's variables. Throws
/// Error(kInternal) when a one-hot row is violated.
Schedule decode(const IlpModel& model, const BitVec& assignment);

/// The 0/1 assignment a schedule stands for, auxiliary variables included.
/// Throws Error(kValidation) when the schedule does not fit the model.
BitVec encode(const IlpModel& model, const Schedule& schedule);

/// Simple checkpointing plans for the model's problem: periodic checkpoints
/// with greedy recomputation, under a few implementation-choice policies.
/// None is guaranteed to fit the budget.
std::vector<Schedule> candidate_schedules(const Problem& problem);

}  // namespace ckptopt
