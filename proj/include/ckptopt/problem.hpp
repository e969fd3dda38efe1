// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ckptopt/costmodel.hpp"
#include "ckptopt/graph.hpp"

namespace ckptopt {

struct FwdVariant {
  std::string name;
  Bytes workspace = 0;
  Rational cost;
  bool inplace = false;
};

struct BwdVariant {
  std::string name;
  Bytes workspace = 0;
  Rational cost;
  DepsKind deps_kind = DepsKind::kInput;
  std::vector<int> deps;  // positions, ascending
};

/// Graph, ablated catalog and dependency sets resolved onto tensor positions.
/// Stage indices follow backward execution order (descending node id).
struct Problem {
  ComputationGraph graph;
  ImplementationCatalog catalog;  // after ablation
  DependencySets sets;
  AblationMode mode = AblationMode::kAll;

  std::vector<std::vector<FwdVariant>> fwd;  // [p - 1]; intermediates carry one implicit variant
  std::vector<std::vector<BwdVariant>> bwd;  // [stage]
  std::vector<Bytes> grad_bytes;             // [stage]
  std::vector<int> inplace_input;            // [p - 1]: overwritten input position, 0 if not eligible

  int num_tensors() const { return sets.num_tensors(); }
  int num_stages() const { return static_cast<int>(sets.stage_nodes.size()); }
  Bytes params() const { return graph.params_bytes; }
  Bytes bytes(int pos) const { return sets.tensor(pos).bytes; }
  bool is_intermediate(int pos) const { return sets.tensor(pos).intermediate; }
  const std::vector<FwdVariant>& fwd_variants(int pos) const { return fwd.at(static_cast<std::size_t>(pos - 1)); }
  const std::vector<int>& inputs(int pos) const { return sets.fwd_deps.at(static_cast<std::size_t>(pos - 1)); }
  int frontier(int stage) const { return sets.frontier.at(static_cast<std::size_t>(stage)); }
  int stage_node(int stage) const { return sets.stage_nodes.at(static_cast<std::size_t>(stage)); }
  int stage_of_node(int node) const;
  const std::vector<int>& local_bound(int stage, int pos) const {
    return sets.local_bound.at(static_cast<std::size_t>(stage)).at(static_cast<std::size_t>(pos - 1));
  }
};

Problem build_problem(const ComputationGraph& g, const ImplementationCatalog& catalog,
                      AblationMode mode = AblationMode::kAll, BoundKind bound_kind = BoundKind::kUpper);

}  // namespace ckptopt
