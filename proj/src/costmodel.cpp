// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/costmodel.hpp"

#include <set>

#include "json_util.hpp"

namespace ckptopt {

using nlohmann::json;

const char* to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::kNone: return "none";
    case AblationMode::kConv: return "conv";
    case AblationMode::kOut: return "out";
    case AblationMode::kInt: return "int";
    case AblationMode::kAll: return "all";
  }
  return "all";
}

AblationMode parse_ablation(const std::string& text) {
  if (text == "none") return AblationMode::kNone;
  if (text == "conv") return AblationMode::kConv;
  if (text == "out") return AblationMode::kOut;
  if (text == "int") return AblationMode::kInt;
  if (text == "all") return AblationMode::kAll;
  throw Error(ErrorCode::kInvalidArgument, "unknown ablation mode '" + text + "'");
}

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kValidation, msg); }

const BackwardImpl* find_graph_impl(const ComputationGraph& g, int node, const std::string& name) {
  const BackwardNode* b = g.backward_of(node);
  if (b == nullptr) return nullptr;
  for (const BackwardImpl& impl : b->impls) {
    if (impl.name == name) return &impl;
  }
  return nullptr;
}

ImplVariant parse_variant(const json& jv, const std::string& where) {
  ImplVariant v;
  v.name = detail::get_string(jv, "name", where);
  v.workspace = detail::get_int(jv, "workspace_bytes", where + " variant '" + v.name + "'");
  v.cost = detail::get_rational(jv, "cost", where + " variant '" + v.name + "'");
  if (v.workspace < 0) invalid(where + " variant '" + v.name + "': negative workspace");
  if (v.cost < Rational(0)) invalid(where + " variant '" + v.name + "': negative cost");
  if (jv.contains("inplace")) {
    if (!jv["inplace"].is_boolean()) throw Error(ErrorCode::kParse, where + ": 'inplace' must be a boolean");
    v.inplace_capable = jv["inplace"].get<bool>();
  }
  return v;
}

void check_unique(const std::vector<ImplVariant>& vs, const std::string& where) {
  std::set<std::string> names;
  for (const ImplVariant& v : vs) {
    if (v.name.empty()) invalid(where + ": variant with empty name");
    if (!names.insert(v.name).second) invalid(where + ": duplicate variant name '" + v.name + "'");
  }
}

}  // namespace

ImplementationCatalog load_catalog(const std::string& document, const ComputationGraph& g) {
  json doc = detail::parse_json(document, "catalog");
  detail::require_format(doc, "catalog");
  ImplementationCatalog c;
  c.cost_unit = detail::get_string_or(doc, "cost_unit", "");
  const std::size_t slots = static_cast<std::size_t>(g.num_nodes()) + 1;
  c.forward.assign(slots, {});
  c.backward.assign(slots, {});
  std::vector<bool> seen_fwd(slots, false);
  std::vector<bool> seen_bwd(slots, false);
  for (const json& entry : detail::get_array(doc, "forward", "catalog")) {
    int node = static_cast<int>(detail::get_int(entry, "node", "catalog forward entry"));
    std::string where = "forward node " + std::to_string(node);
    if (node < 1 || node > g.num_nodes()) invalid("catalog references unknown node " + std::to_string(node));
    if (seen_fwd[static_cast<std::size_t>(node)]) invalid("duplicate catalog entry for " + where);
    seen_fwd[static_cast<std::size_t>(node)] = true;
    auto& list = c.forward[static_cast<std::size_t>(node)];
    for (const json& jv : detail::get_array(entry, "variants", where)) list.push_back(parse_variant(jv, where));
    if (list.empty()) invalid(where + ": empty variant list");
    check_unique(list, where);
  }
  if (doc.contains("backward")) {
    for (const json& entry : detail::get_array(doc, "backward", "catalog")) {
      int node = static_cast<int>(detail::get_int(entry, "node", "catalog backward entry"));
      std::string where = "backward node " + std::to_string(node);
      if (node < 1 || node > g.num_nodes() || g.backward_of(node) == nullptr) {
        invalid("catalog references unknown backward node " + std::to_string(node));
      }
      if (seen_bwd[static_cast<std::size_t>(node)]) invalid("duplicate catalog entry for " + where);
      seen_bwd[static_cast<std::size_t>(node)] = true;
      auto& list = c.backward[static_cast<std::size_t>(node)];
      for (const json& jv : detail::get_array(entry, "variants", where)) {
        ImplVariant v = parse_variant(jv, where);
        const BackwardImpl* gi = find_graph_impl(g, node, v.name);
        if (jv.contains("deps")) {
          v.explicit_deps = true;
          for (const json& d : detail::get_array(jv, "deps", where)) {
            if (!d.is_string()) throw Error(ErrorCode::kParse, where + ": deps must be tensor labels");
            v.deps.push_back(d.get<std::string>());
          }
        } else if (gi == nullptr) {
          invalid(where + " variant '" + v.name + "': no deps given and no graph implementation of that name");
        }
        if (jv.contains("deps_kind")) {
          v.deps_kind = parse_deps_kind(detail::get_string(jv, "deps_kind", where));
        } else if (gi != nullptr) {
          v.deps_kind = gi->deps_kind;
        }
        list.push_back(std::move(v));
      }
      if (list.empty()) invalid(where + ": empty variant list");
      check_unique(list, where);
    }
  }
  for (int node = 1; node <= g.num_nodes(); ++node) {
    if (c.forward[static_cast<std::size_t>(node)].empty()) {
      invalid("catalog has no forward variants for node " + std::to_string(node));
    }
  }
  for (const BackwardNode& b : g.backward) {
    if (c.backward[static_cast<std::size_t>(b.node)].empty()) {
      invalid("catalog has no backward variants for node " + std::to_string(b.node));
    }
  }
  return c;
}

ImplementationCatalog load_catalog_file(const std::string& path, const ComputationGraph& g) {
  return load_catalog(read_text_file(path), g);
}

std::string serialize_catalog(const ImplementationCatalog& c, const ComputationGraph& g) {
  json doc;
  doc["format"] = 1;
  doc["cost_unit"] = c.cost_unit;
  json fwd = json::array();
  for (int node = 1; node <= g.num_nodes(); ++node) {
    json vs = json::array();
    for (const ImplVariant& v : c.forward_of(node)) {
      vs.push_back({{"name", v.name},
                    {"workspace_bytes", v.workspace},
                    {"cost", detail::rational_json(v.cost)},
                    {"inplace", v.inplace_capable}});
    }
    fwd.push_back({{"node", node}, {"variants", vs}});
  }
  doc["forward"] = fwd;
  json bwd = json::array();
  for (const BackwardNode& b : g.backward) {
    json vs = json::array();
    for (const ImplVariant& v : c.backward_of(b.node)) {
      json jv = {{"name", v.name},
                 {"workspace_bytes", v.workspace},
                 {"cost", detail::rational_json(v.cost)},
                 {"deps_kind", to_string(v.deps_kind)}};
      if (v.explicit_deps) jv["deps"] = v.deps;
      vs.push_back(jv);
    }
    bwd.push_back({{"node", b.node}, {"variants", vs}});
  }
  doc["backward"] = bwd;
  return doc.dump(2) + "\n";
}

ImplementationCatalog apply_ablation(const ImplementationCatalog& c, AblationMode mode) {
  if (mode == AblationMode::kAll) return c;
  ImplementationCatalog out = c;
  for (auto& list : out.forward) {
    if (list.empty() || mode == AblationMode::kConv) continue;
    list.resize(1);
  }
  for (auto& list : out.backward) {
    if (list.empty()) continue;
    std::vector<ImplVariant> kept{list.front()};
    const DepsKind base = list.front().deps_kind;
    for (std::size_t l = 1; l < list.size(); ++l) {
      const ImplVariant& v = list[l];
      bool keep = false;
      switch (mode) {
        case AblationMode::kConv: keep = v.deps_kind == base; break;
        case AblationMode::kOut: keep = v.deps_kind == DepsKind::kOutput; break;
        case AblationMode::kInt: keep = v.deps_kind == DepsKind::kIntermediate; break;
        default: break;
      }
      if (keep) kept.push_back(v);
    }
    list = std::move(kept);
  }
  return out;
}

}  // namespace ckptopt
