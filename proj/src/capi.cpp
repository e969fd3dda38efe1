// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/ckptopt.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "ckptopt/costmodel.hpp"
#include "ckptopt/graph.hpp"
#include "ckptopt/ilp.hpp"
#include "ckptopt/oracle.hpp"
#include "ckptopt/schedule.hpp"
#include "ckptopt/solver.hpp"
#include "ckptopt/sweep.hpp"
#include "json_util.hpp"

struct ckpt_instance {
  ckptopt::ComputationGraph graph;
  ckptopt::ImplementationCatalog catalog;
};

struct ckpt_result {
  std::shared_ptr<const ckptopt::IlpModel> model;
  ckptopt::SolveResult result;
};

namespace {

using namespace ckptopt;

thread_local std::string g_last_error;

ckpt_error fail(ckpt_error code, const std::string& message) {
  g_last_error = message;
  return code;
}

ckpt_error code_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidArgument: return CKPT_E_INVALID_ARGUMENT;
    case ErrorCode::kParse: return CKPT_E_PARSE;
    case ErrorCode::kValidation: return CKPT_E_VALIDATION;
    case ErrorCode::kIo: return CKPT_E_IO;
    case ErrorCode::kCapExceeded: return CKPT_E_CAP_EXCEEDED;
    case ErrorCode::kInternal: return CKPT_E_INTERNAL;
  }
  return CKPT_E_INTERNAL;
}

// Runs `fn`, mapping exceptions onto error codes.
template <typename Fn>
ckpt_error guard(Fn fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const Error& e) {
    return fail(code_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CKPT_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CKPT_E_INTERNAL, e.what());
  }
}

void put(char** out, const std::string& text) {
  if (out == nullptr) return;
  char* s = static_cast<char*>(std::malloc(text.size() + 1));
  if (s == nullptr) throw std::bad_alloc();
  std::memcpy(s, text.c_str(), text.size() + 1);
  *out = s;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

struct Resolved {
  AblationMode ablation = AblationMode::kAll;
  BoundKind bound = BoundKind::kUpper;
  bool inplace = false;
  SolveOptions solve;
  int threads = 1;
};

Resolved resolve(const ckpt_options* o) {
  ckpt_options defaults;
  ckpt_options_init(&defaults);
  if (o == nullptr) o = &defaults;
  Resolved r;
  if (o->ablation != nullptr) r.ablation = parse_ablation(o->ablation);
  if (o->bound != nullptr) r.bound = parse_bound_kind(o->bound);
  r.inplace = o->inplace != 0;
  if (!(o->time_limit > 0)) throw Error(ErrorCode::kInvalidArgument, "time limit must be positive");
  if (o->node_limit < 0) throw Error(ErrorCode::kInvalidArgument, "node limit must be nonnegative");
  if (o->gap_target < 0) throw Error(ErrorCode::kInvalidArgument, "gap target must be nonnegative");
  if (o->threads < 1) throw Error(ErrorCode::kInvalidArgument, "threads must be at least 1");
  r.solve.time_limit = o->time_limit;
  r.solve.node_limit = o->node_limit;
  r.solve.gap_target = o->gap_target;
  if (o->branch_order != nullptr) r.solve.branch_order = parse_branch_order(o->branch_order);
  r.solve.heuristics = o->heuristics != 0;
  r.solve.seed = o->seed;
  r.threads = o->threads;
  return r;
}

Problem problem_of(const ckpt_instance* inst, const Resolved& r) {
  return build_problem(inst->graph, inst->catalog, r.ablation, r.bound);
}

IlpOptions ilp_options(const Resolved& r) {
  IlpOptions io;
  io.bound_kind = r.bound;
  io.inplace = r.inplace;
  io.ablation = r.ablation;
  return io;
}

std::vector<Bytes> budget_list(const int64_t* budgets, size_t n) {
  if (n > 0) require(budgets, "budgets");
  std::vector<Bytes> out(budgets, budgets + n);
  for (Bytes b : out) {
    if (b < 0) throw Error(ErrorCode::kInvalidArgument, "budgets must be nonnegative");
  }
  return out;
}

}  // namespace

extern "C" {

const char* ckpt_version(void) { return ckptopt::version(); }

const char* ckpt_last_error(void) { return g_last_error.c_str(); }

void ckpt_string_free(char* s) { std::free(s); }

void ckpt_options_init(ckpt_options* o) {
  if (o == nullptr) return;
  o->ablation = "all";
  o->bound = "upper";
  o->inplace = 0;
  o->time_limit = 60.0;
  o->node_limit = 0;
  o->gap_target = 0.0;
  o->branch_order = "fixed-priority";
  o->heuristics = 1;
  o->seed = 0;
  o->threads = 1;
}

ckpt_error ckpt_parse_bytes(const char* text, int64_t* bytes) {
  return guard([&] {
    require(text, "text");
    require(bytes, "bytes");
    *bytes = parse_bytes(text);
    return CKPT_OK;
  });
}

ckpt_error ckpt_instance_load(const char* graph_path, const char* catalog_path, ckpt_instance** out) {
  return guard([&] {
    require(graph_path, "graph path");
    require(catalog_path, "catalog path");
    require(out, "out");
    auto inst = std::make_unique<ckpt_instance>();
    inst->graph = load_graph_file(graph_path);
    inst->catalog = load_catalog_file(catalog_path, inst->graph);
    *out = inst.release();
    return CKPT_OK;
  });
}

ckpt_error ckpt_instance_parse(const char* graph_json, const char* catalog_json, ckpt_instance** out) {
  return guard([&] {
    require(graph_json, "graph document");
    require(catalog_json, "catalog document");
    require(out, "out");
    auto inst = std::make_unique<ckpt_instance>();
    inst->graph = load_graph(graph_json);
    inst->catalog = load_catalog(catalog_json, inst->graph);
    *out = inst.release();
    return CKPT_OK;
  });
}

ckpt_error ckpt_instance_generate(const char* kind, int n, uint64_t seed, int variants, int64_t unit_bytes,
                                  ckpt_instance** out) {
  return guard([&] {
    require(kind, "kind");
    require(out, "out");
    if (unit_bytes <= 0) throw Error(ErrorCode::kInvalidArgument, "unit bytes must be positive");
    if (variants < 0) throw Error(ErrorCode::kInvalidArgument, "variants must be nonnegative");
    GenOptions go;
    go.kind = parse_graph_kind(kind);
    go.n = n;
    go.seed = seed;
    go.variants = variants;
    go.unit_bytes = unit_bytes;
    auto [g, c] = generate_synthetic(go);
    auto inst = std::make_unique<ckpt_instance>();
    inst->graph = std::move(g);
    inst->catalog = std::move(c);
    *out = inst.release();
    return CKPT_OK;
  });
}

ckpt_error ckpt_instance_graph_json(const ckpt_instance* inst, char** out) {
  return guard([&] {
    require(inst, "instance");
    require(out, "out");
    put(out, serialize_graph(inst->graph));
    return CKPT_OK;
  });
}

ckpt_error ckpt_instance_catalog_json(const ckpt_instance* inst, char** out) {
  return guard([&] {
    require(inst, "instance");
    require(out, "out");
    put(out, serialize_catalog(inst->catalog, inst->graph));
    return CKPT_OK;
  });
}

void ckpt_instance_free(ckpt_instance* inst) { delete inst; }

ckpt_error ckpt_store_everything(const ckpt_instance* inst, const ckpt_options* options, char** schedule) {
  return guard([&] {
    require(inst, "instance");
    require(schedule, "schedule");
    const Problem p = problem_of(inst, resolve(options));
    put(schedule, serialize_schedule(store_everything(p)));
    return CKPT_OK;
  });
}

ckpt_error ckpt_solve(const ckpt_instance* inst, int64_t budget, const ckpt_options* options, ckpt_result** out) {
  return guard([&] {
    require(inst, "instance");
    require(out, "out");
    const Resolved r = resolve(options);
    auto res = std::make_unique<ckpt_result>();
    auto model = std::make_shared<IlpModel>(build_model(problem_of(inst, r), budget, ilp_options(r)));
    res->result = solve(*model, r.solve);
    res->model = std::move(model);
    *out = res.release();
    return CKPT_OK;
  });
}

ckpt_solve_status ckpt_result_status(const ckpt_result* result) {
  if (result == nullptr) return CKPT_SOLVE_TIMEOUT_NO_INCUMBENT;
  switch (result->result.status) {
    case SolveStatus::kOptimal: return CKPT_SOLVE_OPTIMAL;
    case SolveStatus::kFeasibleGap: return CKPT_SOLVE_FEASIBLE_GAP;
    case SolveStatus::kInfeasible: return CKPT_SOLVE_INFEASIBLE;
    case SolveStatus::kTimeoutNoIncumbent: return CKPT_SOLVE_TIMEOUT_NO_INCUMBENT;
  }
  return CKPT_SOLVE_TIMEOUT_NO_INCUMBENT;
}

const char* ckpt_result_status_name(const ckpt_result* result) {
  return result == nullptr ? "" : to_string(result->result.status);
}

int ckpt_result_has_schedule(const ckpt_result* result) { return result != nullptr && result->result.has_solution(); }

ckpt_error ckpt_result_schedule(const ckpt_result* result, char** schedule) {
  return guard([&] {
    require(result, "result");
    require(schedule, "schedule");
    if (!result->result.has_solution()) throw Error(ErrorCode::kInvalidArgument, "the solve found no schedule");
    put(schedule, serialize_schedule(decode(*result->model, result->result.assignment)));
    return CKPT_OK;
  });
}

ckpt_error ckpt_result_telemetry(const ckpt_result* result, char** jsonl) {
  return guard([&] {
    require(result, "result");
    require(jsonl, "jsonl");
    put(jsonl, telemetry_jsonl(result->result));
    return CKPT_OK;
  });
}

ckpt_error ckpt_result_summary(const ckpt_result* result, char** json) {
  return guard([&] {
    require(result, "result");
    require(json, "json");
    const SolveResult& r = result->result;
    nlohmann::ordered_json j;
    j["status"] = to_string(r.status);
    j["budget"] = result->model->budget;
    if (r.has_solution()) {
      j["objective"] = r.objective.str();
      j["objective_decimal"] = r.objective.to_decimal(6);
      j["recomputations"] = r.recomputations;
    } else {
      j["objective"] = nullptr;
    }
    j["lower_bound"] = r.lower_bound.str();
    if (auto g = r.gap()) {
      j["gap"] = *g;
    } else {
      j["gap"] = nullptr;
    }
    j["nodes"] = r.nodes;
    j["memo_hits"] = r.memo_hits;
    const IlpStats st = result->model->stats();
    j["n_vars"] = st.n_vars;
    j["n_constraints"] = st.n_constraints;
    put(json, j.dump(2) + "\n");
    return CKPT_OK;
  });
}

void ckpt_result_free(ckpt_result* result) { delete result; }

ckpt_error ckpt_simulate(const ckpt_instance* inst, const char* schedule, const ckpt_options* options,
                         ckpt_trace_format format, char** trace, char** summary, char** violations) {
  return guard([&] {
    require(inst, "instance");
    require(schedule, "schedule");
    const Problem p = problem_of(inst, resolve(options));
    const Schedule s = parse_schedule(schedule);
    const std::vector<std::string> bad = validate(s, p);
    if (!bad.empty()) {
      std::string text;
      for (const std::string& v : bad) text += v + "\n";
      put(violations, text);
      return fail(CKPT_E_VALIDATION, std::to_string(bad.size()) + " schedule violation(s): " + bad.front());
    }
    const SimulationTrace t = simulate(s, p);
    put(trace, trace_report(t, format == CKPT_TRACE_JSON ? TraceFormat::kJson : TraceFormat::kCsv));
    nlohmann::ordered_json j;
    j["peak"] = t.peak;
    j["total_cost"] = t.total_cost.str();
    j["total_cost_decimal"] = t.total_cost.to_decimal(6);
    j["steps"] = t.steps.size();
    put(summary, j.dump(2) + "\n");
    put(violations, "");
    return CKPT_OK;
  });
}

ckpt_error ckpt_export_lp(const ckpt_instance* inst, int64_t budget, const ckpt_options* options, char** lp,
                          char** stats_json) {
  return guard([&] {
    require(inst, "instance");
    const Resolved r = resolve(options);
    const IlpModel m = build_model(problem_of(inst, r), budget, ilp_options(r));
    put(lp, export_lp(m));
    put(stats_json, m.stats_json());
    return CKPT_OK;
  });
}

ckpt_error ckpt_sweep(const ckpt_instance* inst, const int64_t* budgets, size_t n_budgets, const char* modes,
                      const ckpt_options* options, char** csv, char** cells) {
  return guard([&] {
    require(inst, "instance");
    require(modes, "modes");
    const Resolved r = resolve(options);
    SweepOptions so;
    so.budgets = budget_list(budgets, n_budgets);
    so.modes.clear();
    std::stringstream ss(modes);
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) so.modes.push_back(parse_ablation(item));
    }
    so.bound_kind = r.bound;
    so.inplace = r.inplace;
    so.solve = r.solve;
    so.threads = r.threads;
    const SweepResult res = sweep(inst->graph, inst->catalog, so);
    put(csv, sweep_csv(res));
    if (cells != nullptr) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const SweepCell& c : res.cells) {
        nlohmann::ordered_json j;
        j["budget"] = c.budget;
        j["mode"] = to_string(c.mode);
        j["status"] = c.error.empty() ? to_string(c.status) : "error";
        j["objective"] = c.objective ? nlohmann::ordered_json(c.objective->str()) : nlohmann::ordered_json(nullptr);
        j["lower_bound"] = c.lower_bound.str();
        j["simulated_peak"] = c.simulated_peak ? nlohmann::ordered_json(*c.simulated_peak) : nlohmann::ordered_json(nullptr);
        if (!c.error.empty()) j["error"] = c.error;
        j["schedule"] = c.schedule ? nlohmann::ordered_json(serialize_schedule(*c.schedule)) : nlohmann::ordered_json(nullptr);
        arr.push_back(std::move(j));
      }
      nlohmann::ordered_json doc;
      doc["baseline_cost"] = res.baseline_cost.str();
      doc["baseline_peak"] = res.baseline_peak;
      doc["cells"] = std::move(arr);
      put(cells, doc.dump(2) + "\n");
    }
    return CKPT_OK;
  });
}

ckpt_error ckpt_oracle_cross_check(const ckpt_instance* inst, const int64_t* budgets, size_t n_budgets,
                                   const ckpt_options* options, int64_t memory_rhs_delta, int* all_pass,
                                   char** report) {
  return guard([&] {
    require(inst, "instance");
    const Resolved r = resolve(options);
    CrossCheckOptions co;
    co.oracle.inplace = r.inplace;
    co.solve = r.solve;
    co.memory_rhs_delta = memory_rhs_delta;
    const CrossCheckReport rep = cross_check(problem_of(inst, r), budget_list(budgets, n_budgets), co);
    if (all_pass != nullptr) *all_pass = rep.all_pass ? 1 : 0;
    put(report, cross_check_json(rep));
    return CKPT_OK;
  });
}

}  // extern "C"
