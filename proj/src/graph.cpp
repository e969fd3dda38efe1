// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace ckptopt {

using nlohmann::json;

const char* to_string(DepsKind kind) {
  switch (kind) {
    case DepsKind::kInput: return "input";
    case DepsKind::kOutput: return "output";
    case DepsKind::kIntermediate: return "intermediate";
  }
  return "input";
}

DepsKind parse_deps_kind(const std::string& text) {
  if (text == "input") return DepsKind::kInput;
  if (text == "output") return DepsKind::kOutput;
  if (text == "intermediate") return DepsKind::kIntermediate;
  throw Error(ErrorCode::kParse, "unknown deps_kind '" + text + "'");
}

const char* to_string(BoundKind kind) { return kind == BoundKind::kUpper ? "upper" : "tight"; }

BoundKind parse_bound_kind(const std::string& text) {
  if (text == "upper") return BoundKind::kUpper;
  if (text == "tight") return BoundKind::kTight;
  throw Error(ErrorCode::kInvalidArgument, "unknown bound kind '" + text + "'");
}

const BackwardNode* ComputationGraph::backward_of(int id) const {
  auto it = std::lower_bound(backward.begin(), backward.end(), id,
                             [](const BackwardNode& b, int v) { return b.node < v; });
  return it != backward.end() && it->node == id ? &*it : nullptr;
}

int ComputationGraph::sink() const {
  std::vector<bool> consumed(nodes.size() + 1, false);
  for (const Node& n : nodes) {
    for (int d : n.deps) {
      if (d >= 1 && d <= num_nodes()) consumed[static_cast<std::size_t>(d)] = true;
    }
  }
  int sink = 0;
  for (const Node& n : nodes) {
    if (!consumed[static_cast<std::size_t>(n.id)]) sink = n.id;
  }
  return sink;
}

int DependencySets::position_of(const std::string& label) const {
  for (std::size_t p = 0; p < tensors.size(); ++p) {
    if (tensors[p].label == label) return static_cast<int>(p) + 1;
  }
  return 0;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

ComputationGraph load_graph(const std::string& document) {
  json doc = detail::parse_json(document, "graph");
  detail::require_format(doc, "graph");
  ComputationGraph g;
  g.name = detail::get_string_or(doc, "name", "");
  g.params_bytes = detail::get_int_or(doc, "params_bytes", 0, "params_bytes");
  for (const json& jn : detail::get_array(doc, "nodes", "graph")) {
    Node n;
    n.id = static_cast<int>(detail::get_int(jn, "id", "node"));
    n.output_bytes = detail::get_int(jn, "output_bytes", "node " + std::to_string(n.id));
    n.op = detail::get_string_or(jn, "op", "");
    if (jn.contains("deps")) {
      for (const json& d : detail::get_array(jn, "deps", "node")) {
        if (!d.is_number_integer()) throw Error(ErrorCode::kParse, "node deps must be integers");
        n.deps.push_back(d.get<int>());
      }
    }
    g.nodes.push_back(std::move(n));
  }
  if (doc.contains("backward")) {
    for (const json& jb : detail::get_array(doc, "backward", "graph")) {
      BackwardNode b;
      b.node = static_cast<int>(detail::get_int(jb, "node", "backward"));
      b.grad_bytes = detail::get_int(jb, "grad_bytes", "backward " + std::to_string(b.node));
      for (const json& ji : detail::get_array(jb, "impls", "backward")) {
        BackwardImpl impl;
        impl.name = detail::get_string(ji, "name", "backward impl");
        impl.deps_kind = parse_deps_kind(detail::get_string_or(ji, "deps_kind", "input"));
        if (ji.contains("extra_deps")) {
          for (const json& e : detail::get_array(ji, "extra_deps", "backward impl")) {
            if (!e.is_string()) throw Error(ErrorCode::kParse, "extra_deps must be tensor labels");
            impl.extra_deps.push_back(e.get<std::string>());
          }
        }
        b.impls.push_back(std::move(impl));
      }
      g.backward.push_back(std::move(b));
    }
  }
  if (doc.contains("intermediates")) {
    for (const json& jm : detail::get_array(doc, "intermediates", "graph")) {
      Intermediate m;
      m.id = static_cast<int>(detail::get_int(jm, "id", "intermediate"));
      m.bytes = detail::get_int(jm, "bytes", "intermediate " + std::to_string(m.id));
      m.creator = static_cast<int>(detail::get_int(jm, "creator", "intermediate"));
      g.intermediates.push_back(m);
    }
  }
  std::sort(g.nodes.begin(), g.nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  std::stable_sort(g.backward.begin(), g.backward.end(),
                   [](const BackwardNode& a, const BackwardNode& b) { return a.node < b.node; });
  std::stable_sort(g.intermediates.begin(), g.intermediates.end(),
                   [](const Intermediate& a, const Intermediate& b) { return a.id < b.id; });
  validate_graph(g);
  return g;
}

ComputationGraph load_graph_file(const std::string& path) { return load_graph(read_text_file(path)); }

namespace {

bool reaches(const ComputationGraph& g, int from, int to) {
  // Follows data-flow edges (dep -> consumer) from `from`.
  std::vector<std::vector<int>> consumers(g.nodes.size() + 1);
  for (const Node& n : g.nodes) {
    for (int d : n.deps) {
      if (d >= 1 && d <= g.num_nodes()) consumers[static_cast<std::size_t>(d)].push_back(n.id);
    }
  }
  std::vector<bool> seen(g.nodes.size() + 1, false);
  std::vector<int> stack{from};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    if (seen[static_cast<std::size_t>(v)]) continue;
    seen[static_cast<std::size_t>(v)] = true;
    for (int c : consumers[static_cast<std::size_t>(v)]) stack.push_back(c);
  }
  return false;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kValidation, msg); }

}  // namespace

void validate_graph(const ComputationGraph& g) {
  if (g.nodes.empty()) invalid("graph has no nodes");
  if (g.params_bytes < 0) invalid("negative size: params_bytes");
  for (std::size_t idx = 0; idx < g.nodes.size(); ++idx) {
    const Node& n = g.nodes[idx];
    if (n.id != static_cast<int>(idx) + 1) {
      invalid("node ids must be dense and contiguous from 1 (found id " + std::to_string(n.id) + ")");
    }
    if (n.output_bytes < 0) invalid("negative size: node " + std::to_string(n.id));
  }
  for (const Node& n : g.nodes) {
    std::set<int> seen;
    for (int d : n.deps) {
      if (d == n.id) invalid("cycle detected: self-loop at node " + std::to_string(n.id));
      if (d < 1 || d > g.num_nodes()) {
        invalid("dangling dependency: node " + std::to_string(n.id) + " depends on unknown node " + std::to_string(d));
      }
      if (!seen.insert(d).second) {
        invalid("duplicate dependency " + std::to_string(d) + " of node " + std::to_string(n.id));
      }
    }
  }
  for (const Node& n : g.nodes) {
    for (int d : n.deps) {
      if (d > n.id) {
        std::string msg = "non-topological edge (" + std::to_string(d) + "," + std::to_string(n.id) + ")";
        if (reaches(g, n.id, d)) msg += "; edge closes a cycle";
        invalid(msg);
      }
    }
  }
  int sinks = 0;
  {
    std::vector<bool> consumed(g.nodes.size() + 1, false);
    for (const Node& n : g.nodes) {
      for (int d : n.deps) consumed[static_cast<std::size_t>(d)] = true;
    }
    for (const Node& n : g.nodes) sinks += consumed[static_cast<std::size_t>(n.id)] ? 0 : 1;
  }
  if (sinks != 1) invalid("graph must have exactly one sink node (found " + std::to_string(sinks) + ")");

  std::set<int> inter_ids;
  for (const Intermediate& m : g.intermediates) {
    if (!inter_ids.insert(m.id).second) invalid("duplicate intermediate id " + std::to_string(m.id));
    if (m.bytes < 0) invalid("negative size: intermediate " + std::to_string(m.id));
    if (m.creator < 1 || m.creator > g.num_nodes()) {
      invalid("dangling dependency: intermediate " + std::to_string(m.id) + " has unknown creator " +
              std::to_string(m.creator));
    }
  }
  std::set<int> bwd_nodes;
  for (const BackwardNode& b : g.backward) {
    if (b.node < 1 || b.node > g.num_nodes()) {
      invalid("dangling dependency: backward entry for unknown node " + std::to_string(b.node));
    }
    if (!bwd_nodes.insert(b.node).second) invalid("duplicate backward entry for node " + std::to_string(b.node));
    if (b.grad_bytes < 0) invalid("negative size: gradient of node " + std::to_string(b.node));
    if (b.impls.empty()) invalid("backward node " + std::to_string(b.node) + " has no implementations");
    std::set<std::string> names;
    for (const BackwardImpl& impl : b.impls) {
      if (impl.name.empty()) invalid("backward impl of node " + std::to_string(b.node) + " has empty name");
      if (!names.insert(impl.name).second) {
        invalid("duplicate backward impl '" + impl.name + "' for node " + std::to_string(b.node));
      }
    }
  }
  // Resolving every dependency set checks labels and the frontier rule.
  DependencySets sets = compute_dependency_sets(g, BoundKind::kUpper);
  (void)sets;
}

std::string serialize_graph(const ComputationGraph& g) {
  json doc;
  doc["format"] = 1;
  doc["name"] = g.name;
  doc["params_bytes"] = g.params_bytes;
  json nodes = json::array();
  for (const Node& n : g.nodes) {
    nodes.push_back({{"id", n.id}, {"output_bytes", n.output_bytes}, {"deps", n.deps}, {"op", n.op}});
  }
  doc["nodes"] = nodes;
  json backward = json::array();
  for (const BackwardNode& b : g.backward) {
    json impls = json::array();
    for (const BackwardImpl& impl : b.impls) {
      impls.push_back({{"name", impl.name}, {"deps_kind", to_string(impl.deps_kind)}, {"extra_deps", impl.extra_deps}});
    }
    backward.push_back({{"node", b.node}, {"grad_bytes", b.grad_bytes}, {"impls", impls}});
  }
  doc["backward"] = backward;
  json inter = json::array();
  for (const Intermediate& m : g.intermediates) {
    inter.push_back({{"id", m.id}, {"bytes", m.bytes}, {"creator", m.creator}});
  }
  doc["intermediates"] = inter;
  return doc.dump(2) + "\n";
}

std::vector<TensorRef> tensor_order(const ComputationGraph& g) {
  std::vector<TensorRef> out;
  std::map<int, std::vector<const Intermediate*>> by_creator;
  for (const Intermediate& m : g.intermediates) by_creator[m.creator].push_back(&m);
  for (const Node& n : g.nodes) {
    out.push_back({"x" + std::to_string(n.id), n.output_bytes, false, n.id, n.id});
    for (const Intermediate* m : by_creator[n.id]) {
      out.push_back({"m" + std::to_string(m->id), m->bytes, true, n.id, m->id});
    }
  }
  return out;
}

std::vector<int> resolve_backward_deps(const ComputationGraph& g, const DependencySets& sets, int node,
                                       DepsKind kind, const std::vector<std::string>& extra) {
  std::set<int> deps;
  int pos = sets.node_pos.at(static_cast<std::size_t>(node));
  switch (kind) {
    case DepsKind::kInput:
      for (int d : g.node(node).deps) deps.insert(sets.node_pos[static_cast<std::size_t>(d)]);
      break;
    case DepsKind::kOutput:
      deps.insert(pos);
      break;
    case DepsKind::kIntermediate:
      for (int p = 1; p <= sets.num_tensors(); ++p) {
        if (sets.tensor(p).intermediate && sets.tensor(p).node == node) deps.insert(p);
      }
      break;
  }
  for (const std::string& label : extra) {
    int p = sets.position_of(label);
    if (p == 0) invalid("dangling dependency: backward of node " + std::to_string(node) + " uses unknown tensor '" + label + "'");
    deps.insert(p);
  }
  for (int p : deps) {
    if (sets.tensor(p).node > node) {
      invalid("backward of node " + std::to_string(node) + " depends on " + sets.tensor(p).label +
              " which is produced after the node");
    }
  }
  return {deps.begin(), deps.end()};
}

DependencySets compute_dependency_sets(const ComputationGraph& g, BoundKind bound_kind) {
  DependencySets s;
  s.bound_kind = bound_kind;
  s.tensors = tensor_order(g);
  const int T = s.num_tensors();
  s.node_pos.assign(static_cast<std::size_t>(g.num_nodes()) + 1, 0);
  for (int p = 1; p <= T; ++p) {
    if (!s.tensor(p).intermediate) s.node_pos[static_cast<std::size_t>(s.tensor(p).node)] = p;
  }
  s.fwd_deps.assign(static_cast<std::size_t>(T), {});
  for (int p = 1; p <= T; ++p) {
    const TensorRef& t = s.tensor(p);
    auto& deps = s.fwd_deps[static_cast<std::size_t>(p - 1)];
    if (t.intermediate) {
      deps.push_back(s.node_pos[static_cast<std::size_t>(t.node)]);
    } else {
      for (int d : g.node(t.node).deps) deps.push_back(s.node_pos[static_cast<std::size_t>(d)]);
      std::sort(deps.begin(), deps.end());
    }
  }
  // last_use[j]: the largest position whose forward step reads tensor j.
  std::vector<int> last_use(static_cast<std::size_t>(T) + 1, 0);
  for (int p = 1; p <= T; ++p) {
    for (int j : s.fwd_deps[static_cast<std::size_t>(p - 1)]) {
      last_use[static_cast<std::size_t>(j)] = std::max(last_use[static_cast<std::size_t>(j)], p);
    }
  }
  s.local_fwd.assign(static_cast<std::size_t>(T), {});
  for (int p = 1; p <= T; ++p) {
    for (int j = 1; j < p; ++j) {
      if (last_use[static_cast<std::size_t>(j)] >= p) s.local_fwd[static_cast<std::size_t>(p - 1)].push_back(j);
    }
  }

  for (auto it = g.backward.rbegin(); it != g.backward.rend(); ++it) s.stage_nodes.push_back(it->node);
  const std::size_t S = s.stage_nodes.size();
  s.frontier.resize(S);
  s.local_bound.resize(S);
  s.bwd_deps.resize(S);
  s.grad_local.resize(S);
  s.grad_local_bytes.assign(S, 0);
  for (std::size_t k = 0; k < S; ++k) {
    int node = s.stage_nodes[k];
    int f = s.node_pos[static_cast<std::size_t>(node)];
    while (f < T && s.tensor(f + 1).intermediate) ++f;
    s.frontier[k] = f;
    s.local_bound[k].assign(static_cast<std::size_t>(T), {});
    for (int p = 1; p <= T; ++p) {
      auto& set = s.local_bound[k][static_cast<std::size_t>(p - 1)];
      if (bound_kind == BoundKind::kUpper) {
        set = s.local_fwd[static_cast<std::size_t>(p - 1)];
      } else {
        std::set<int> acc;
        for (int t = p; t <= f; ++t) {
          for (int j : s.fwd_deps[static_cast<std::size_t>(t - 1)]) {
            if (j < p) acc.insert(j);
          }
        }
        set.assign(acc.begin(), acc.end());
      }
    }
    const BackwardNode* b = g.backward_of(node);
    for (const BackwardImpl& impl : b->impls) {
      s.bwd_deps[k].push_back(resolve_backward_deps(g, s, node, impl.deps_kind, impl.extra_deps));
    }
    for (const BackwardNode& other : g.backward) {
      int t = other.node;
      if (t <= node) continue;
      bool needed = false;
      for (int j : g.node(t).deps) {
        if (j <= node && g.backward_of(j) != nullptr) needed = true;
      }
      if (needed) {
        s.grad_local[k].push_back(t);
        s.grad_local_bytes[k] += other.grad_bytes;
      }
    }
  }
  return s;
}

}  // namespace ckptopt
