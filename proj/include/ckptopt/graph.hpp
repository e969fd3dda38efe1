// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ckptopt/types.hpp"

namespace ckptopt {

enum class DepsKind { kInput, kOutput, kIntermediate };

const char* to_string(DepsKind kind);
DepsKind parse_deps_kind(const std::string& text);

struct Node {
  int id = 0;
  Bytes output_bytes = 0;
  std::vector<int> deps;
  std::string op;
};

/// A backward implementation as declared by the graph. Its dependency set is
/// derived from `deps_kind` and extended with `extra_deps` (tensor labels).
struct BackwardImpl {
  std::string name;
  DepsKind deps_kind = DepsKind::kInput;
  std::vector<std::string> extra_deps;
};

struct BackwardNode {
  int node = 0;
  Bytes grad_bytes = 0;
  std::vector<BackwardImpl> impls;
};

/// Extra storable tensor produced alongside a forward node, e.g. a sign mask.
struct Intermediate {
  int id = 0;
  Bytes bytes = 0;
  int creator = 0;
};

struct ComputationGraph {
  std::string name;
  Bytes params_bytes = 0;
  std::vector<Node> nodes;             // nodes[i - 1].id == i
  std::vector<BackwardNode> backward;  // sorted by node id
  std::vector<Intermediate> intermediates;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  const Node& node(int id) const { return nodes.at(static_cast<std::size_t>(id - 1)); }
  const BackwardNode* backward_of(int id) const;
  int sink() const;
};

/// One storable tensor in the unified order: each node output is followed by
/// the intermediates its node creates. Positions are 1-based.
struct TensorRef {
  std::string label;  // "x<node>" or "m<intermediate id>"
  Bytes bytes = 0;
  bool intermediate = false;
  int node = 0;       // producing node (the creator for intermediates)
  int id = 0;         // node id or intermediate id
};

enum class BoundKind { kUpper, kTight };

const char* to_string(BoundKind kind);
BoundKind parse_bound_kind(const std::string& text);

struct DependencySets {
  BoundKind bound_kind = BoundKind::kUpper;
  std::vector<TensorRef> tensors;              // index p - 1 for position p
  std::vector<int> node_pos;                   // node id -> position (index 0 unused)
  std::vector<std::vector<int>> fwd_deps;      // N_p as positions, per position
  std::vector<std::vector<int>> local_fwd;     // L_p without parameters, per position

  std::vector<int> stage_nodes;                // backward nodes in execution order
  std::vector<int> frontier;                   // per stage: last position created by its node
  std::vector<std::vector<std::vector<int>>> local_bound;  // [stage][p - 1]
  std::vector<std::vector<std::vector<int>>> bwd_deps;     // [stage][graph impl]
  std::vector<std::vector<int>> grad_local;    // [stage] -> node ids whose gradient is held
  std::vector<Bytes> grad_local_bytes;         // [stage]

  int num_tensors() const { return static_cast<int>(tensors.size()); }
  const TensorRef& tensor(int pos) const { return tensors.at(static_cast<std::size_t>(pos - 1)); }
  /// Position of a tensor label, or 0 when unknown.
  int position_of(const std::string& label) const;
};

ComputationGraph load_graph(const std::string& document);
ComputationGraph load_graph_file(const std::string& path);
std::string serialize_graph(const ComputationGraph& g);

/// Throws Error(kValidation) describing the first problem found.
void validate_graph(const ComputationGraph& g);

std::vector<TensorRef> tensor_order(const ComputationGraph& g);

DependencySets compute_dependency_sets(const ComputationGraph& g, BoundKind bound_kind = BoundKind::kUpper);

/// Resolves a graph backward implementation to tensor positions.
std::vector<int> resolve_backward_deps(const ComputationGraph& g, const DependencySets& sets, int node,
                                       DepsKind kind, const std::vector<std::string>& extra);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ckptopt
