// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/problem.hpp"

#include <algorithm>
#include <set>

namespace ckptopt {

int Problem::stage_of_node(int node) const {
  for (int k = 0; k < num_stages(); ++k) {
    if (stage_node(k) == node) return k;
  }
  return -1;
}

Problem build_problem(const ComputationGraph& g, const ImplementationCatalog& catalog, AblationMode mode,
                      BoundKind bound_kind) {
  Problem p;
  p.graph = g;
  p.catalog = apply_ablation(catalog, mode);
  p.mode = mode;
  p.sets = compute_dependency_sets(g, bound_kind);
  const int T = p.num_tensors();
  if (static_cast<int>(p.catalog.forward.size()) != g.num_nodes() + 1) {
    throw Error(ErrorCode::kValidation, "catalog does not match graph node count");
  }

  p.fwd.resize(static_cast<std::size_t>(T));
  p.inplace_input.assign(static_cast<std::size_t>(T), 0);
  for (int pos = 1; pos <= T; ++pos) {
    const TensorRef& t = p.sets.tensor(pos);
    auto& list = p.fwd[static_cast<std::size_t>(pos - 1)];
    if (t.intermediate) {
      list.push_back({"create", 0, Rational(0), false});
      continue;
    }
    bool capable = false;
    for (const ImplVariant& v : p.catalog.forward_of(t.node)) {
      list.push_back({v.name, v.workspace, v.cost, v.inplace_capable});
      capable = capable || v.inplace_capable;
    }
    const auto& in = p.inputs(pos);
    if (capable && in.size() == 1 && !p.is_intermediate(in[0]) && p.bytes(in[0]) == t.bytes) {
      p.inplace_input[static_cast<std::size_t>(pos - 1)] = in[0];
    }
  }

  for (int k = 0; k < p.num_stages(); ++k) {
    int node = p.stage_node(k);
    const BackwardNode* gb = g.backward_of(node);
    p.grad_bytes.push_back(gb->grad_bytes);
    std::vector<BwdVariant> list;
    for (const ImplVariant& v : p.catalog.backward_of(node)) {
      BwdVariant bv{v.name, v.workspace, v.cost, v.deps_kind, {}};
      if (v.explicit_deps) {
        std::set<int> deps;
        for (const std::string& label : v.deps) {
          int q = p.sets.position_of(label);
          if (q == 0) {
            throw Error(ErrorCode::kValidation, "backward variant '" + v.name + "' of node " + std::to_string(node) +
                                                    " depends on unknown tensor '" + label + "'");
          }
          if (p.sets.tensor(q).node > node) {
            throw Error(ErrorCode::kValidation, "backward variant '" + v.name + "' of node " + std::to_string(node) +
                                                    " depends on later tensor " + label);
          }
          deps.insert(q);
        }
        bv.deps.assign(deps.begin(), deps.end());
      } else {
        const auto& impls = gb->impls;
        auto it = std::find_if(impls.begin(), impls.end(), [&](const BackwardImpl& bi) { return bi.name == v.name; });
        if (it == impls.end()) {
          throw Error(ErrorCode::kValidation, "backward variant '" + v.name + "' of node " + std::to_string(node) +
                                                  " has no matching graph implementation");
        }
        bv.deps = p.sets.bwd_deps[static_cast<std::size_t>(k)][static_cast<std::size_t>(it - impls.begin())];
      }
      list.push_back(std::move(bv));
    }
    if (list.empty()) throw Error(ErrorCode::kValidation, "empty catalog after ablation for node " + std::to_string(node));
    p.bwd.push_back(std::move(list));
  }
  return p;
}

}  // namespace ckptopt
