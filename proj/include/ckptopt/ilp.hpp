// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ckptopt/problem.hpp"

namespace ckptopt {

enum class VarKind { kStoreFwd, kStore, kRecompute, kDeltaFwd, kDeltaRe, kDeltaBwd, kP, kQ, kAux };

/// `stage` is a stage index (execution order), `pos` a 1-based tensor position
/// and `variant` an index into the ablated variant list.
struct VarInfo {
  VarKind kind = VarKind::kStore;
  int stage = -1;
  int pos = 0;
  int variant = -1;
  std::string name;
  bool fixed_zero = false;
};

enum class Sense { kLe, kGe, kEq };

struct Term {
  int var = 0;
  Rational coef;
};

/// sum(terms) + constant  <sense>  rhs
struct LinearConstraint {
  std::vector<Term> terms;
  Sense sense = Sense::kLe;
  Rational constant;
  Rational rhs;
  std::string tag;
  std::string name;
};

struct IlpOptions {
  BoundKind bound_kind = BoundKind::kUpper;
  bool inplace = false;
  AblationMode ablation = AblationMode::kAll;
  /// Added to the right-hand side of every memory constraint. Zero except in
  /// fault-injection tests.
  Bytes memory_rhs_delta = 0;
};

struct IlpStats {
  int n_vars = 0;
  int n_fixed = 0;
  int n_constraints = 0;
  std::map<std::string, int> by_tag;
  std::map<std::string, int> vars_by_kind;
};

struct IlpModel {
  std::shared_ptr<const Problem> problem;
  Bytes budget = 0;
  IlpOptions options;
  std::vector<VarInfo> vars;
  std::vector<LinearConstraint> constraints;
  std::vector<Term> objective;

  // Lookup tables; -1 marks an absent variable.
  std::vector<int> sf;                          // [p - 1]
  std::vector<std::vector<int>> df;             // [p - 1][l]
  std::vector<std::vector<int>> s;              // [stage][p - 1]
  std::vector<std::vector<int>> r;              // [stage][p - 1]
  std::vector<std::vector<std::vector<int>>> dr;  // [stage][p - 1][l]
  std::vector<std::vector<int>> db;             // [stage][l]
  std::vector<std::vector<int>> p;              // [stage][p - 1]
  std::vector<std::vector<int>> q;              // [stage][p - 1]

  int num_vars() const { return static_cast<int>(vars.size()); }
  IlpStats stats() const;
  std::string stats_json() const;
};

IlpModel build_model(const Problem& problem, Bytes budget, const IlpOptions& options);
IlpModel build_model(const ComputationGraph& g, const ImplementationCatalog& catalog, Bytes budget,
                     const IlpOptions& options);

/// CPLEX LP text. Objective coefficients are scaled to integers; the factor
/// is recorded in a comment line.
std::string export_lp(const IlpModel& model);

struct Evaluation {
  bool feasible = false;
  std::vector<std::string> violated;  // distinct tags in first-violation order
  Rational objective;
};

Evaluation evaluate_assignment(const IlpModel& model, const BitVec& assignment);

const char* to_string(VarKind kind);
const char* to_string(Sense sense);

}  // namespace ckptopt
