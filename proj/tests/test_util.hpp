// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers: fixture access and small hand-built instances.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ckptopt/costmodel.hpp"
#include "ckptopt/graph.hpp"
#include "ckptopt/problem.hpp"

namespace ckptopt::testing {

inline std::string fixture(const std::string& name) { return std::string(CKPTOPT_FIXTURES) + "/" + name; }

struct Inst {
  ComputationGraph g;
  ImplementationCatalog c;
};

inline Inst load_fixture(const std::string& stem) {
  Inst i;
  i.g = load_graph_file(fixture(stem + ".graph.json"));
  i.c = load_catalog_file(fixture(stem + ".catalog.json"), i.g);
  return i;
}

inline Inst gen(GraphKind kind, int n, int variants = 0, std::uint64_t seed = 0, Bytes unit = 1) {
  GenOptions go;
  go.kind = kind;
  go.n = n;
  go.variants = variants;
  go.seed = seed;
  go.unit_bytes = unit;
  auto [g, c] = generate_synthetic(go);
  return {std::move(g), std::move(c)};
}

struct FwdSpec {
  std::string name = "default";
  Bytes workspace = 0;
  std::string cost = "1";
  bool inplace = false;
};

struct BwdSpec {
  std::string name = "default";
  std::string deps_kind = "input";
  std::vector<std::string> extra;
  Bytes workspace = 0;
  std::string cost = "1";
};

struct NodeSpec {
  Bytes bytes = 1;
  std::vector<int> deps;
  Bytes grad = 1;
  bool backward = true;
  std::vector<FwdSpec> fwd{FwdSpec{}};
  std::vector<BwdSpec> bwd{BwdSpec{}};
  std::string op = "linear";
};

struct IntermediateSpec {
  Bytes bytes = 0;
  int creator = 0;
};

/// Builds graph and catalog documents and loads them through the parsers.
inline Inst build(const std::vector<NodeSpec>& nodes, Bytes params = 0,
                  const std::vector<IntermediateSpec>& intermediates = {}) {
  using nlohmann::json;
  json g = {{"format", 1}, {"name", "hand"}, {"params_bytes", params}};
  json c = {{"format", 1}, {"cost_unit", "synthetic"}};
  json gn = json::array(), gb = json::array(), cf = json::array(), cb = json::array(), gi = json::array();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeSpec& n = nodes[i];
    const int id = static_cast<int>(i) + 1;
    gn.push_back({{"id", id}, {"op", n.op}, {"output_bytes", n.bytes}, {"deps", n.deps}});
    json fv = json::array();
    for (const FwdSpec& f : n.fwd) {
      fv.push_back({{"name", f.name}, {"workspace_bytes", f.workspace}, {"cost", f.cost}, {"inplace", f.inplace}});
    }
    cf.push_back({{"node", id}, {"variants", fv}});
    if (!n.backward) continue;
    json impls = json::array(), bv = json::array();
    for (const BwdSpec& b : n.bwd) {
      impls.push_back({{"name", b.name}, {"deps_kind", b.deps_kind}, {"extra_deps", b.extra}});
      bv.push_back({{"name", b.name}, {"deps_kind", b.deps_kind}, {"workspace_bytes", b.workspace}, {"cost", b.cost}});
    }
    gb.push_back({{"node", id}, {"grad_bytes", n.grad}, {"impls", impls}});
    cb.push_back({{"node", id}, {"variants", bv}});
  }
  for (std::size_t i = 0; i < intermediates.size(); ++i) {
    gi.push_back({{"id", static_cast<int>(i) + 1}, {"bytes", intermediates[i].bytes}, {"creator", intermediates[i].creator}});
  }
  g["nodes"] = gn;
  g["backward"] = gb;
  g["intermediates"] = gi;
  c["forward"] = cf;
  c["backward"] = cb;
  Inst out;
  out.g = load_graph(g.dump());
  out.c = load_catalog(c.dump(), out.g);
  return out;
}

/// Unit-size, unit-cost chain of n nodes.
inline std::vector<NodeSpec> chain_spec(int n) {
  std::vector<NodeSpec> nodes(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) nodes[static_cast<std::size_t>(i)].deps = {i};
  return nodes;
}

inline Problem problem_of(const Inst& i, AblationMode mode = AblationMode::kAll, BoundKind bk = BoundKind::kUpper) {
  return build_problem(i.g, i.c, mode, bk);
}

}  // namespace ckptopt::testing
