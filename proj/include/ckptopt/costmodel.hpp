// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ckptopt/graph.hpp"
#include "ckptopt/types.hpp"

namespace ckptopt {

struct ImplVariant {
  std::string name;
  Bytes workspace = 0;
  Rational cost;
  DepsKind deps_kind = DepsKind::kInput;
  bool inplace_capable = false;
  /// Backward only: explicit dependency labels. Empty with `explicit_deps`
  /// false means "use the graph implementation with the same name".
  std::vector<std::string> deps;
  bool explicit_deps = false;
};

struct ImplementationCatalog {
  std::string cost_unit;
  std::vector<std::vector<ImplVariant>> forward;   // indexed by node id (0 unused)
  std::vector<std::vector<ImplVariant>> backward;  // indexed by node id, empty without backward

  const std::vector<ImplVariant>& forward_of(int node) const { return forward.at(static_cast<std::size_t>(node)); }
  const std::vector<ImplVariant>& backward_of(int node) const { return backward.at(static_cast<std::size_t>(node)); }
};

enum class AblationMode { kNone, kConv, kOut, kInt, kAll };

const char* to_string(AblationMode mode);
AblationMode parse_ablation(const std::string& text);

ImplementationCatalog load_catalog(const std::string& document, const ComputationGraph& g);
ImplementationCatalog load_catalog_file(const std::string& path, const ComputationGraph& g);
std::string serialize_catalog(const ImplementationCatalog& c, const ComputationGraph& g);

/// Keeps a subset of variants per node; the first (default) variant always survives.
ImplementationCatalog apply_ablation(const ImplementationCatalog& c, AblationMode mode);

enum class GraphKind { kChain, kResidual, kInceptionToy, kUnetToy };

const char* to_string(GraphKind kind);
GraphKind parse_graph_kind(const std::string& text);

struct GenOptions {
  GraphKind kind = GraphKind::kChain;
  int n = 4;
  std::uint64_t seed = 0;
  int variants = 0;       // cap on variants per node; 0 keeps the kind's full menu
  Bytes unit_bytes = 1;   // size of one activation unit
};

std::pair<ComputationGraph, ImplementationCatalog> generate_synthetic(const GenOptions& options);

}  // namespace ckptopt
