// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Uses the library only through ckptopt.h.

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ckptopt/ckptopt.h"
#include "json.hpp"

namespace {

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitBadInput = 1;
constexpr int kExitGap = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitTimeout = 4;
constexpr int kExitInvalidSchedule = 5;
constexpr int kExitCheckFailed = 6;

using json = nlohmann::ordered_json;

struct Failure {
  int code;
  std::string message;
};

struct CString {
  char* p = nullptr;
  ~CString() { ckpt_string_free(p); }
  std::string str() const { return p == nullptr ? std::string() : std::string(p); }
};

struct InstanceDeleter {
  void operator()(ckpt_instance* i) const { ckpt_instance_free(i); }
};
struct ResultDeleter {
  void operator()(ckpt_result* r) const { ckpt_result_free(r); }
};
using Instance = std::unique_ptr<ckpt_instance, InstanceDeleter>;
using Result = std::unique_ptr<ckpt_result, ResultDeleter>;

void check(ckpt_error e, const std::string& what) {
  if (e != CKPT_OK) throw Failure{kExitBadInput, what + ": " + ckpt_last_error()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitBadInput, "cannot read " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw Failure{kExitBadInput, "cannot write " + path};
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Failure{kExitBadInput, "sha256 failed"};
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::int64_t parse_budget(const std::string& text) {
  std::int64_t b = 0;
  if (ckpt_parse_bytes(text.c_str(), &b) != CKPT_OK) throw Failure{kExitBadInput, ckpt_last_error()};
  return b;
}

std::vector<std::int64_t> parse_budget_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(parse_budget(item));
  }
  if (out.empty()) throw Failure{kExitBadInput, "empty budget list"};
  return out;
}

// Options shared by the model-building subcommands.
struct Common {
  std::string graph;
  std::string catalog;
  std::string ablation = "all";
  std::string bound = "upper";
  bool inplace = false;
  double time_limit = 60.0;
  std::int64_t node_limit = 0;
  double gap_target = 0.0;
  std::string branch_order = "fixed-priority";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string format = "text";

  ckpt_options options() const {
    ckpt_options o;
    ckpt_options_init(&o);
    o.ablation = ablation.c_str();
    o.bound = bound.c_str();
    o.inplace = inplace ? 1 : 0;
    o.time_limit = time_limit;
    o.node_limit = node_limit;
    o.gap_target = gap_target;
    o.branch_order = branch_order.c_str();
    o.seed = seed;
    o.threads = threads;
    return o;
  }

  json as_json() const {
    json j;
    j["ablation"] = ablation;
    j["bound"] = bound;
    j["inplace"] = inplace;
    j["time_limit_s"] = time_limit;
    j["node_limit"] = node_limit;
    j["gap_target"] = gap_target;
    j["branch_order"] = branch_order;
    j["seed"] = seed;
    j["threads"] = threads;
    return j;
  }

  Instance load() const {
    ckpt_instance* inst = nullptr;
    check(ckpt_instance_load(graph.c_str(), catalog.c_str(), &inst), "loading inputs");
    return Instance(inst);
  }
};

void add_inputs(CLI::App* app, Common& c) {
  app->add_option("--graph", c.graph, "Graph JSON file")->required()->check(CLI::ExistingFile);
  app->add_option("--catalog", c.catalog, "Implementation catalog JSON file")->required()->check(CLI::ExistingFile);
  app->add_option("--ablation", c.ablation, "Variant set: none, conv, out, int or all");
  app->add_option("--bound", c.bound, "Recompute local set bound: upper or tight");
}

void add_search(CLI::App* app, Common& c) {
  app->add_flag("--inplace", c.inplace, "Allow in-place recomputation");
  app->add_option("--time-limit", c.time_limit, "Wall-clock limit per solve in seconds");
  app->add_option("--node-limit", c.node_limit, "Search node limit per solve (0 = none); deterministic");
  app->add_option("--gap-target", c.gap_target, "Stop once the relative gap is at most this value");
  app->add_option("--branch-order", c.branch_order, "fixed-priority, paper-order or most-fractional");
}

void add_general(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Recorded seed; the search itself is deterministic");
  app->add_option("--threads", c.threads, "Worker threads (sweep cells)");
  app->add_option("--format", c.format, "Report format: text or json (simulate traces: csv or json)");
}

json manifest(const std::string& command, const Common& c, const std::vector<std::string>& inputs,
              const std::vector<std::string>& outputs, json extra) {
  json m;
  m["tool"] = "ckptopt";
  m["version"] = ckpt_version();
  m["command"] = command;
  json in = json::array();
  for (const std::string& p : inputs) in.push_back({{"path", p}, {"sha256", sha256_hex(read_file(p))}});
  m["inputs"] = in;
  json opts = c.as_json();
  for (auto it = extra.begin(); it != extra.end(); ++it) opts[it.key()] = it.value();
  m["options"] = opts;
  m["wall_clock_budget_s"] = c.time_limit;
  m["outputs"] = outputs;
  return m;
}

void report(const Common& c, const std::string& text_line, const json& j) {
  if (c.format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << text_line << "\n";
  }
}

int cmd_solve(const Common& c, const std::string& budget_text, const std::string& out) {
  const std::int64_t budget = parse_budget(budget_text);
  Instance inst = c.load();
  const ckpt_options o = c.options();
  ckpt_result* raw = nullptr;
  check(ckpt_solve(inst.get(), budget, &o, &raw), "solve");
  Result res(raw);
  CString summary;
  CString telemetry;
  check(ckpt_result_summary(res.get(), &summary.p), "summary");
  check(ckpt_result_telemetry(res.get(), &telemetry.p), "telemetry");
  std::vector<std::string> outputs;
  if (ckpt_result_has_schedule(res.get()) != 0) {
    CString sched;
    check(ckpt_result_schedule(res.get(), &sched.p), "schedule");
    write_file(out, sched.str());
    outputs.push_back(out);
  }
  write_file(out + ".telemetry.jsonl", telemetry.str());
  outputs.push_back(out + ".telemetry.jsonl");
  json sj = json::parse(summary.str());
  json extra;
  extra["budget_bytes"] = budget;
  json m = manifest("solve", c, {c.graph, c.catalog}, outputs, extra);
  m["result"] = sj;
  write_file(out + ".manifest.json", m.dump(2) + "\n");

  std::string line = std::string("status ") + ckpt_result_status_name(res.get());
  if (!sj["objective"].is_null()) line += " objective " + sj["objective_decimal"].get<std::string>();
  if (!sj["gap"].is_null()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " gap %.6f", sj["gap"].get<double>());
    line += buf;
  }
  report(c, line, sj);
  switch (ckpt_result_status(res.get())) {
    case CKPT_SOLVE_OPTIMAL: return kExitOk;
    case CKPT_SOLVE_FEASIBLE_GAP: return kExitGap;
    case CKPT_SOLVE_INFEASIBLE: return kExitInfeasible;
    case CKPT_SOLVE_TIMEOUT_NO_INCUMBENT: return kExitTimeout;
  }
  return kExitTimeout;
}

int cmd_simulate(const Common& c, const std::string& schedule_path, const std::string& trace_path,
                 const std::string& budget_text) {
  Instance inst = c.load();
  const ckpt_options o = c.options();
  const std::string doc = read_file(schedule_path);
  if (c.format != "csv" && c.format != "json" && c.format != "text") {
    throw Failure{kExitBadInput, "unknown format '" + c.format + "'"};
  }
  CString trace;
  CString summary;
  CString violations;
  const ckpt_error e = ckpt_simulate(inst.get(), doc.c_str(), &o, c.format == "json" ? CKPT_TRACE_JSON : CKPT_TRACE_CSV,
                                     &trace.p, &summary.p, &violations.p);
  if (e == CKPT_E_VALIDATION && !violations.str().empty()) {
    std::cerr << "invalid schedule:\n" << violations.str();
    return kExitInvalidSchedule;
  }
  check(e, "simulate");
  write_file(trace_path, trace.str());
  json sj = json::parse(summary.str());
  int code = kExitOk;
  if (!budget_text.empty()) {
    const std::int64_t budget = parse_budget(budget_text);
    sj["budget"] = budget;
    sj["within_budget"] = sj["peak"].get<std::int64_t>() <= budget;
    if (sj["peak"].get<std::int64_t>() > budget) code = kExitCheckFailed;
  }
  json extra;
  if (!budget_text.empty()) extra["budget_bytes"] = sj["budget"];
  json m = manifest("simulate", c, {c.graph, c.catalog, schedule_path}, {trace_path}, extra);
  m["result"] = sj;
  write_file(trace_path + ".manifest.json", m.dump(2) + "\n");
  report(c, "peak " + std::to_string(sj["peak"].get<std::int64_t>()) + " total_cost " +
                sj["total_cost_decimal"].get<std::string>(),
         sj);
  return code;
}

int cmd_sweep(const Common& c, const std::string& budgets_text, const std::string& grid, const std::string& out,
              const std::string& cells_path) {
  const std::vector<std::int64_t> budgets = parse_budget_list(budgets_text);
  Instance inst = c.load();
  const ckpt_options o = c.options();
  CString csv;
  CString cells;
  check(ckpt_sweep(inst.get(), budgets.data(), budgets.size(), grid.c_str(), &o, &csv.p, &cells.p), "sweep");
  write_file(out, csv.str());
  std::vector<std::string> outputs{out};
  if (!cells_path.empty()) {
    write_file(cells_path, cells.str());
    outputs.push_back(cells_path);
  }
  json extra;
  extra["budgets_bytes"] = budgets;
  extra["ablation_grid"] = grid;
  write_file(out + ".manifest.json", manifest("sweep", c, {c.graph, c.catalog}, outputs, extra).dump(2) + "\n");
  report(c, csv.str(), json::parse(cells.str()));
  return kExitOk;
}

int cmd_oracle(const Common& c, const std::string& budgets_text, const std::string& out) {
  const std::vector<std::int64_t> budgets = parse_budget_list(budgets_text);
  Instance inst = c.load();
  const ckpt_options o = c.options();
  CString rep;
  int pass = 0;
  check(ckpt_oracle_cross_check(inst.get(), budgets.data(), budgets.size(), &o, 0, &pass, &rep.p), "oracle");
  if (!out.empty()) {
    write_file(out, rep.str());
    json extra;
    extra["budgets_bytes"] = budgets;
    write_file(out + ".manifest.json", manifest("oracle", c, {c.graph, c.catalog}, {out}, extra).dump(2) + "\n");
  }
  report(c, pass != 0 ? "all budgets match" : "MISMATCH", json::parse(rep.str()));
  return pass != 0 ? kExitOk : kExitCheckFailed;
}

int cmd_export_lp(const Common& c, const std::string& budget_text, const std::string& out, const std::string& stats) {
  const std::int64_t budget = parse_budget(budget_text);
  Instance inst = c.load();
  const ckpt_options o = c.options();
  CString lp;
  CString st;
  check(ckpt_export_lp(inst.get(), budget, &o, &lp.p, &st.p), "export-lp");
  write_file(out, lp.str());
  if (!stats.empty()) write_file(stats, st.str());
  report(c, "wrote " + out, json::parse(st.str()));
  return kExitOk;
}

int cmd_gen(const Common& c, const std::string& kind, int n, int variants, const std::string& unit,
            const std::string& graph_out, const std::string& catalog_out) {
  ckpt_instance* raw = nullptr;
  check(ckpt_instance_generate(kind.c_str(), n, c.seed, variants, parse_budget(unit), &raw), "gen");
  Instance inst(raw);
  CString g;
  CString cat;
  check(ckpt_instance_graph_json(inst.get(), &g.p), "gen");
  check(ckpt_instance_catalog_json(inst.get(), &cat.p), "gen");
  write_file(graph_out, g.str());
  write_file(catalog_out, cat.str());
  report(c, "wrote " + graph_out + " and " + catalog_out, json{{"graph", graph_out}, {"catalog", catalog_out}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-constrained checkpointing and implementation selection"};
  app.set_version_flag("--version", std::string(ckpt_version()));
  app.require_subcommand(1);
  Common c;

  std::string budget;
  std::string budgets;
  std::string out;
  std::string schedule;
  std::string trace;
  std::string grid = "none,conv,out,int,all";
  std::string cells;
  std::string stats;
  std::string kind = "chain";
  int n = 4;
  int variants = 0;
  std::string unit = "1";

  CLI::App* solve = app.add_subcommand("solve", "Solve for an optimal schedule under a memory budget");
  add_inputs(solve, c);
  add_search(solve, c);
  add_general(solve, c);
  solve->add_option("--budget", budget, "Memory budget, e.g. 512MiB")->required();
  solve->add_option("--out", out, "Schedule output file")->required();

  CLI::App* sim = app.add_subcommand("simulate", "Execute a schedule and write its memory trace");
  add_inputs(sim, c);
  add_general(sim, c);
  sim->add_option("--schedule", schedule, "Schedule file")->required()->check(CLI::ExistingFile);
  sim->add_option("--trace", trace, "Trace output file")->required();
  sim->add_option("--budget", budget, "Fail when the peak exceeds this budget");

  CLI::App* sw = app.add_subcommand("sweep", "Solve a grid of budgets and ablation modes");
  add_inputs(sw, c);
  add_search(sw, c);
  add_general(sw, c);
  sw->add_option("--budgets", budgets, "Comma-separated budgets")->required();
  sw->add_option("--ablation-grid", grid, "Comma-separated ablation modes");
  sw->add_option("--out", out, "CSV output file")->required();
  sw->add_option("--cells", cells, "Optional JSON file with every cell's schedule");

  CLI::App* ora = app.add_subcommand("oracle", "Check the solver against exhaustive enumeration");
  add_inputs(ora, c);
  add_search(ora, c);
  add_general(ora, c);
  ora->add_option("--budgets", budgets, "Comma-separated budgets")->required();
  ora->add_option("--out", out, "Report output file");

  CLI::App* lp = app.add_subcommand("export-lp", "Write the 0-1 program in LP format");
  add_inputs(lp, c);
  add_general(lp, c);
  lp->add_flag("--inplace", c.inplace, "Include in-place recomputation");
  lp->add_option("--budget", budget, "Memory budget")->required();
  lp->add_option("--out", out, "LP output file")->required();
  lp->add_option("--stats", stats, "Optional model statistics JSON file");

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic graph and catalog");
  add_general(gen, c);
  gen->add_option("--kind", kind, "chain, residual, inception-toy or unet-toy");
  gen->add_option("--n", n, "Number of nodes");
  gen->add_option("--variants", variants, "Cap on variants per operator (0 = full menu)");
  gen->add_option("--unit", unit, "Bytes per activation unit");
  gen->add_option("--graph-out", c.graph, "Graph output file")->required();
  gen->add_option("--catalog-out", c.catalog, "Catalog output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*solve) return cmd_solve(c, budget, out);
    if (*sim) return cmd_simulate(c, schedule, trace, budget);
    if (*sw) return cmd_sweep(c, budgets, grid, out, cells);
    if (*ora) return cmd_oracle(c, budgets, out);
    if (*lp) return cmd_export_lp(c, budget, out, stats);
    if (*gen) return cmd_gen(c, kind, n, variants, unit, c.graph, c.catalog);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
