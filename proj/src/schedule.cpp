// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/schedule.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <sstream>

#include "json_util.hpp"
#include "resolve.hpp"

namespace ckptopt {

using nlohmann::json;

namespace {

BitVec parse_bits(const json& obj, const char* key, const std::string& where) {
  std::string text = detail::get_string(obj, key, where);
  BitVec bits;
  for (char c : text) {
    if (c != '0' && c != '1') throw Error(ErrorCode::kParse, where + ": '" + key + "' must be a 0/1 string");
    bits.push_back(c == '1' ? 1 : 0);
  }
  return bits;
}

std::string label(const Problem& p, int pos) { return p.sets.tensor(pos).label; }

}  // namespace

std::string serialize_schedule(const Schedule& s) {
  json doc;
  doc["format"] = 1;
  doc["tensors"] = s.tensors;
  doc["forward"] = {{"store", detail::bits_to_string(s.forward_store)}, {"impls", s.forward_impl}};
  json stages = json::array();
  for (const StagePlan& st : s.stages) {
    json rec = json::array();
    for (const auto& [pos, impl] : st.recompute) {
      rec.push_back({pos >= 1 && pos <= static_cast<int>(s.tensors.size()) ? s.tensors[static_cast<std::size_t>(pos - 1)]
                                                                            : std::to_string(pos),
                     impl});
    }
    json inplace = json::array();
    for (int pos : st.inplace) inplace.push_back(s.tensors.at(static_cast<std::size_t>(pos - 1)));
    stages.push_back({{"node", st.node},
                      {"backward_impl", st.backward_impl},
                      {"recompute", rec},
                      {"store", detail::bits_to_string(st.store)},
                      {"inplace", inplace}});
  }
  doc["stages"] = stages;
  return doc.dump(2) + "\n";
}

Schedule parse_schedule(const std::string& document) {
  json doc = detail::parse_json(document, "schedule");
  detail::require_format(doc, "schedule");
  Schedule s;
  for (const json& t : detail::get_array(doc, "tensors", "schedule")) {
    if (!t.is_string()) throw Error(ErrorCode::kParse, "schedule: tensor labels must be strings");
    s.tensors.push_back(t.get<std::string>());
  }
  auto pos_of = [&](const std::string& lbl, const std::string& where) {
    auto it = std::find(s.tensors.begin(), s.tensors.end(), lbl);
    if (it == s.tensors.end()) throw Error(ErrorCode::kParse, where + ": unknown tensor '" + lbl + "'");
    return static_cast<int>(it - s.tensors.begin()) + 1;
  };
  if (!doc.contains("forward") || !doc["forward"].is_object()) throw Error(ErrorCode::kParse, "schedule: missing 'forward'");
  s.forward_store = parse_bits(doc["forward"], "store", "schedule forward");
  for (const json& n : detail::get_array(doc["forward"], "impls", "schedule forward")) {
    if (!n.is_string()) throw Error(ErrorCode::kParse, "schedule forward: impl names must be strings");
    s.forward_impl.push_back(n.get<std::string>());
  }
  for (const json& js : detail::get_array(doc, "stages", "schedule")) {
    StagePlan st;
    st.node = static_cast<int>(detail::get_int(js, "node", "schedule stage"));
    std::string where = "schedule stage " + std::to_string(st.node);
    st.backward_impl = detail::get_string(js, "backward_impl", where);
    st.store = parse_bits(js, "store", where);
    for (const json& r : detail::get_array(js, "recompute", where)) {
      if (!r.is_array() || r.size() != 2 || !r[0].is_string() || !r[1].is_string()) {
        throw Error(ErrorCode::kParse, where + ": recompute entries are [tensor, impl] pairs");
      }
      st.recompute.emplace_back(pos_of(r[0].get<std::string>(), where), r[1].get<std::string>());
    }
    for (const json& q : detail::get_array(js, "inplace", where)) {
      if (!q.is_string()) throw Error(ErrorCode::kParse, where + ": inplace entries are tensor labels");
      st.inplace.push_back(pos_of(q.get<std::string>(), where));
    }
    s.stages.push_back(std::move(st));
  }
  return s;
}

std::vector<std::string> validate(const Schedule& s, const Problem& P) {
  std::vector<std::string> out;
  const int T = P.num_tensors();
  bool labels_ok = static_cast<int>(s.tensors.size()) == T;
  for (int p = 1; labels_ok && p <= T; ++p) labels_ok = s.tensors[static_cast<std::size_t>(p - 1)] == label(P, p);
  if (!labels_ok) return {"tensor list does not match the graph"};
  if (static_cast<int>(s.forward_store.size()) != T) out.push_back("forward store row has wrong length");
  if (static_cast<int>(s.forward_impl.size()) != T) {
    out.push_back("forward impl list has wrong length");
  } else {
    for (int p = 1; p <= T; ++p) {
      if (detail::find_fwd_variant(P, p, s.forward_impl[static_cast<std::size_t>(p - 1)]) < 0) {
        out.push_back("forward: unknown impl '" + s.forward_impl[static_cast<std::size_t>(p - 1)] + "' for " +
                      label(P, p));
      }
    }
  }
  if (static_cast<int>(s.stages.size()) != P.num_stages()) {
    out.push_back("expected " + std::to_string(P.num_stages()) + " stages, found " + std::to_string(s.stages.size()));
    return out;
  }
  if (!out.empty()) return out;

  BitVec held = s.forward_store;
  for (int k = 0; k < P.num_stages(); ++k) {
    const StagePlan& st = s.stages[static_cast<std::size_t>(k)];
    const int K = P.stage_node(k);
    const std::string kk = "node k=" + std::to_string(K);
    if (st.node != K) {
      out.push_back("stage " + std::to_string(k + 1) + ": expected node " + std::to_string(K) + ", found " +
                    std::to_string(st.node));
      return out;
    }
    int b = detail::find_bwd_variant(P, k, st.backward_impl);
    if (b < 0) out.push_back(kk + ": unknown backward impl '" + st.backward_impl + "'");
    if (static_cast<int>(st.store.size()) != T) {
      out.push_back(kk + ": store row has wrong length");
      return out;
    }
    BitVec rec(static_cast<std::size_t>(T), 0);
    int last = 0;
    for (const auto& [pos, impl] : st.recompute) {
      if (pos < 1 || pos > T || pos <= last) {
        out.push_back(kk + ": recompute list must hold distinct positions in ascending order");
        continue;
      }
      last = pos;
      rec[static_cast<std::size_t>(pos - 1)] = 1;
      if (pos > P.frontier(k)) out.push_back(kk + ": recompute of " + label(P, pos) + " lies past the frontier");
      if (detail::find_fwd_variant(P, pos, impl) < 0) {
        out.push_back(kk + ": unknown impl '" + impl + "' for recompute of " + label(P, pos));
      }
    }
    std::set<int> inplace(st.inplace.begin(), st.inplace.end());
    for (int pos : st.inplace) {
      if (pos < 1 || pos > T || rec[static_cast<std::size_t>(pos - 1)] == 0) {
        out.push_back(kk + ": in-place flag on a tensor that is not recomputed");
        continue;
      }
      bool capable = false;
      for (const auto& [rp, impl] : st.recompute) {
        if (rp != pos) continue;
        int l = detail::find_fwd_variant(P, pos, impl);
        capable = l >= 0 && P.fwd_variants(pos)[static_cast<std::size_t>(l)].inplace;
      }
      if (P.inplace_input[static_cast<std::size_t>(pos - 1)] == 0 || !capable) {
        out.push_back(kk + ": " + label(P, pos) + " cannot be recomputed in place");
      }
    }

    BitVec avail = held;
    for (const auto& [pos, impl] : st.recompute) {
      if (pos < 1 || pos > T) continue;
      if (P.is_intermediate(pos) && rec[static_cast<std::size_t>(P.inputs(pos).front() - 1)] == 0) {
        out.push_back("intermediate: " + kk + " recomputes " + label(P, pos) + " without its creator");
      }
      for (int j : P.inputs(pos)) {
        if (avail[static_cast<std::size_t>(j - 1)] == 0) {
          out.push_back("Eq7: " + kk + " recompute of " + label(P, pos) + " needs " + label(P, j) +
                        " which is unavailable");
        }
      }
      if (inplace.count(pos) != 0) {
        int j = P.inplace_input[static_cast<std::size_t>(pos - 1)];
        if (j != 0) avail[static_cast<std::size_t>(j - 1)] = 0;
      }
      avail[static_cast<std::size_t>(pos - 1)] = 1;
    }
    for (int p = 1; p <= T; ++p) {
      if (st.store[static_cast<std::size_t>(p - 1)] != 0 && avail[static_cast<std::size_t>(p - 1)] == 0) {
        out.push_back("Eq7: " + kk + " stores " + label(P, p) + " which is neither held nor recomputed");
      }
    }
    if (b >= 0) {
      for (int j : P.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)].deps) {
        if (avail[static_cast<std::size_t>(j - 1)] == 0) {
          out.push_back("Eq8: " + kk + " dep " + label(P, j) + " unavailable");
        }
      }
    }
    held = st.store;
  }
  return out;
}

namespace {

class Simulator {
 public:
  Simulator(const Schedule& s, const Problem& P) : s_(s), P_(P), T_(P.num_tensors()) {
    live_.assign(static_cast<std::size_t>(T_), 0);
    last_use_.assign(static_cast<std::size_t>(T_) + 1, 0);
    for (int p = 1; p <= T_; ++p) {
      for (int j : P.inputs(p)) last_use_[static_cast<std::size_t>(j)] = std::max(last_use_[static_cast<std::size_t>(j)], p);
    }
  }

  SimulationTrace run() {
    forward();
    for (int k = 0; k < P_.num_stages(); ++k) stage(k);
    for (const TraceStep& st : trace_.steps) {
      trace_.peak = std::max(trace_.peak, st.peak);
      trace_.total_cost += st.cost;
    }
    return std::move(trace_);
  }

 private:
  const Schedule& s_;
  const Problem& P_;
  const int T_;
  BitVec live_;
  std::vector<int> last_use_;
  std::set<int> grads_;  // node ids whose gradient is held
  SimulationTrace trace_;

  Bytes mem() const {
    Bytes total = P_.params();
    for (int p = 1; p <= T_; ++p) {
      if (live_[static_cast<std::size_t>(p - 1)] != 0) total += P_.bytes(p);
    }
    for (int t : grads_) total += P_.graph.backward_of(t)->grad_bytes;
    return total;
  }

  void require_live(int pos, const std::string& op) const {
    if (live_[static_cast<std::size_t>(pos - 1)] == 0) {
      throw Error(ErrorCode::kInternal, "simulation deadlock: " + op + " needs " + P_.sets.tensor(pos).label);
    }
  }

  void forward() {
    for (int p = 1; p <= T_; ++p) {
      const std::string op = "forward " + P_.sets.tensor(p).label;
      for (int j : P_.inputs(p)) require_live(j, op);
      int l = detail::find_fwd_variant(P_, p, s_.forward_impl[static_cast<std::size_t>(p - 1)]);
      const FwdVariant& v = P_.fwd_variants(p)[static_cast<std::size_t>(l)];
      TraceStep st{op, mem(), 0, 0, v.cost};
      st.peak = st.before + v.workspace + P_.bytes(p);
      live_[static_cast<std::size_t>(p - 1)] = 1;
      for (int j = 1; j <= p; ++j) {
        if (s_.forward_store[static_cast<std::size_t>(j - 1)] == 0 && last_use_[static_cast<std::size_t>(j)] <= p) {
          live_[static_cast<std::size_t>(j - 1)] = 0;
        }
      }
      st.after = mem();
      trace_.steps.push_back(std::move(st));
    }
  }

  void stage(int k) {
    const StagePlan& plan = s_.stages[static_cast<std::size_t>(k)];
    const int K = P_.stage_node(k);
    const std::string kk = " k=" + std::to_string(K);
    const BwdVariant& bv =
        P_.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(detail::find_bwd_variant(P_, k, plan.backward_impl))];
    std::set<int> inplace(plan.inplace.begin(), plan.inplace.end());

    // keep[j] while positions up to `done` are recomputed: stored, needed by
    // the backward call or read by a later recomputation.
    auto keep = [&](int j, int done) {
      if (plan.store[static_cast<std::size_t>(j - 1)] != 0) return true;
      if (std::binary_search(bv.deps.begin(), bv.deps.end(), j)) return true;
      for (const auto& [t, impl] : plan.recompute) {
        if (t <= done) continue;
        const auto& in = P_.inputs(t);
        if (std::find(in.begin(), in.end(), j) != in.end()) return true;
      }
      return false;
    };
    auto release = [&](int done) {
      for (int j = 1; j <= T_; ++j) {
        if (live_[static_cast<std::size_t>(j - 1)] != 0 && !keep(j, done)) live_[static_cast<std::size_t>(j - 1)] = 0;
      }
    };

    for (const auto& [pos, impl] : plan.recompute) live_[static_cast<std::size_t>(pos - 1)] = 0;
    release(0);
    for (const auto& [pos, impl] : plan.recompute) {
      const std::string op = "recompute " + P_.sets.tensor(pos).label + kk;
      for (int j : P_.inputs(pos)) require_live(j, op);
      const FwdVariant& v = P_.fwd_variants(pos)[static_cast<std::size_t>(detail::find_fwd_variant(P_, pos, impl))];
      TraceStep st{op, mem(), 0, 0, v.cost};
      if (inplace.count(pos) != 0) {
        st.peak = st.before + v.workspace;
        live_[static_cast<std::size_t>(P_.inplace_input[static_cast<std::size_t>(pos - 1)] - 1)] = 0;
      } else {
        st.peak = st.before + v.workspace + P_.bytes(pos);
      }
      live_[static_cast<std::size_t>(pos - 1)] = 1;
      release(pos);
      st.after = mem();
      trace_.steps.push_back(std::move(st));
    }

    const std::string op = "backward" + kk;
    for (int j : bv.deps) require_live(j, op);
    for (int j = 1; j <= T_; ++j) {
      if (plan.store[static_cast<std::size_t>(j - 1)] != 0) require_live(j, op);
    }
    TraceStep st{op, mem(), 0, 0, bv.cost};
    st.peak = st.before + bv.workspace + P_.grad_bytes[static_cast<std::size_t>(k)];
    for (int j = 1; j <= T_; ++j) live_[static_cast<std::size_t>(j - 1)] = plan.store[static_cast<std::size_t>(j - 1)];
    update_grads(K);
    st.after = mem();
    trace_.steps.push_back(std::move(st));
  }

  // Gradient of t is consumed by the backward calls of its inputs and released
  // after the last of them (the smallest id) has run.
  int last_consumer(int t) const {
    int lo = 0;
    for (int j : P_.graph.node(t).deps) {
      if (P_.graph.backward_of(j) != nullptr && (lo == 0 || j < lo)) lo = j;
    }
    return lo;
  }

  void update_grads(int K) {
    for (auto it = grads_.begin(); it != grads_.end();) {
      it = last_consumer(*it) >= K ? grads_.erase(it) : std::next(it);
    }
    if (last_consumer(K) != 0) grads_.insert(K);
  }
};

}  // namespace

SimulationTrace simulate(const Schedule& s, const Problem& problem) {
  std::vector<std::string> violations = validate(s, problem);
  if (!violations.empty()) {
    std::string msg = "invalid schedule:";
    for (const std::string& v : violations) msg += "\n  " + v;
    throw Error(ErrorCode::kValidation, msg);
  }
  return Simulator(s, problem).run();
}

std::string trace_report(const SimulationTrace& trace, TraceFormat format) {
  if (format == TraceFormat::kJson) {
    json steps = json::array();
    int i = 0;
    for (const TraceStep& st : trace.steps) {
      steps.push_back({{"step", ++i},
                       {"op", st.op},
                       {"mem_before", st.before},
                       {"mem_peak", st.peak},
                       {"mem_after", st.after},
                       {"cost", detail::rational_json(st.cost)}});
    }
    json doc = {{"steps", steps}, {"peak_memory", trace.peak}, {"total_cost", detail::rational_json(trace.total_cost)}};
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "step,op,mem_before,mem_peak,mem_after,cost\n";
  int i = 0;
  for (const TraceStep& st : trace.steps) {
    out << ++i << ',' << st.op << ',' << st.before << ',' << st.peak << ',' << st.after << ',' << st.cost.str() << '\n';
  }
  if (!trace.steps.empty()) out << "total,,," << trace.peak << ",," << trace.total_cost.str() << '\n';
  return out.str();
}

Schedule store_everything(const Problem& P) {
  const int T = P.num_tensors();
  Schedule s;
  for (int p = 1; p <= T; ++p) {
    s.tensors.push_back(label(P, p));
    s.forward_impl.push_back(P.fwd_variants(p).front().name);
  }
  std::vector<BitVec> rows(static_cast<std::size_t>(P.num_stages()), BitVec(static_cast<std::size_t>(T), 0));
  BitVec acc(static_cast<std::size_t>(T), 0);
  for (int k = P.num_stages() - 1; k >= 0; --k) {
    for (int j : P.bwd[static_cast<std::size_t>(k)].front().deps) acc[static_cast<std::size_t>(j - 1)] = 1;
    rows[static_cast<std::size_t>(k)] = acc;
  }
  s.forward_store = acc;
  for (int k = 0; k < P.num_stages(); ++k) {
    StagePlan st;
    st.node = P.stage_node(k);
    st.backward_impl = P.bwd[static_cast<std::size_t>(k)].front().name;
    st.store = rows[static_cast<std::size_t>(k)];
    s.stages.push_back(std::move(st));
  }
  return s;
}

namespace {

int one_hot(const std::vector<int>& vars, const BitVec& a, const std::string& what) {
  int chosen = -1;
  for (std::size_t l = 0; l < vars.size(); ++l) {
    if (a[static_cast<std::size_t>(vars[l])] == 0) continue;
    if (chosen >= 0) throw Error(ErrorCode::kInternal, "one-hot violation: several choices for " + what);
    chosen = static_cast<int>(l);
  }
  return chosen;
}

}  // namespace

Schedule decode(const IlpModel& model, const BitVec& a) {
  if (a.size() != static_cast<std::size_t>(model.num_vars())) {
    throw Error(ErrorCode::kInvalidArgument, "assignment length does not match the model");
  }
  const Problem& P = *model.problem;
  const int T = P.num_tensors();
  Schedule s;
  for (int p = 1; p <= T; ++p) {
    s.tensors.push_back(label(P, p));
    s.forward_store.push_back(a[static_cast<std::size_t>(model.sf[static_cast<std::size_t>(p - 1)])]);
    if (P.is_intermediate(p)) {
      s.forward_impl.push_back(P.fwd_variants(p).front().name);
      continue;
    }
    int l = one_hot(model.df[static_cast<std::size_t>(p - 1)], a, "forward " + label(P, p));
    if (l < 0) throw Error(ErrorCode::kInternal, "one-hot violation: no forward impl for " + label(P, p));
    s.forward_impl.push_back(P.fwd_variants(p)[static_cast<std::size_t>(l)].name);
  }
  for (int k = 0; k < P.num_stages(); ++k) {
    StagePlan st;
    st.node = P.stage_node(k);
    const std::string kk = " at k=" + std::to_string(st.node);
    int b = one_hot(model.db[static_cast<std::size_t>(k)], a, "backward" + kk);
    if (b < 0) throw Error(ErrorCode::kInternal, "one-hot violation: no backward impl" + kk);
    st.backward_impl = P.bwd[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)].name;
    for (int p = 1; p <= T; ++p) {
      st.store.push_back(a[static_cast<std::size_t>(model.s[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)])]);
      const bool r = a[static_cast<std::size_t>(model.r[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)])] != 0;
      int l = 0;
      if (!P.is_intermediate(p)) {
        l = one_hot(model.dr[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)], a, "recompute of " + label(P, p) + kk);
        if ((l >= 0) != r) throw Error(ErrorCode::kInternal, "one-hot violation: recompute impl of " + label(P, p) + kk);
      }
      if (!r) continue;
      st.recompute.emplace_back(p, P.fwd_variants(p)[static_cast<std::size_t>(l)].name);
      int q = model.q[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)];
      if (q >= 0 && a[static_cast<std::size_t>(q)] != 0) st.inplace.push_back(p);
    }
    s.stages.push_back(std::move(st));
  }
  return s;
}

BitVec encode(const IlpModel& model, const Schedule& s) {
  const Problem& P = *model.problem;
  const int T = P.num_tensors();
  if (static_cast<int>(s.forward_store.size()) != T || static_cast<int>(s.forward_impl.size()) != T ||
      static_cast<int>(s.stages.size()) != P.num_stages()) {
    throw Error(ErrorCode::kValidation, "schedule does not match the model's graph");
  }
  BitVec a(static_cast<std::size_t>(model.num_vars()), 0);
  auto set = [&](int v) {
    if (v < 0) throw Error(ErrorCode::kValidation, "schedule sets a variable the model does not have");
    a[static_cast<std::size_t>(v)] = 1;
  };
  for (int p = 1; p <= T; ++p) {
    if (s.forward_store[static_cast<std::size_t>(p - 1)] != 0) set(model.sf[static_cast<std::size_t>(p - 1)]);
    if (P.is_intermediate(p)) continue;
    int l = detail::find_fwd_variant(P, p, s.forward_impl[static_cast<std::size_t>(p - 1)]);
    if (l < 0) throw Error(ErrorCode::kValidation, "unknown forward impl for " + label(P, p));
    set(model.df[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(l)]);
  }
  std::map<std::tuple<int, int, int>, int> aux;
  for (int v = 0; v < model.num_vars(); ++v) {
    const VarInfo& info = model.vars[static_cast<std::size_t>(v)];
    if (info.kind == VarKind::kAux) aux[{info.stage, info.variant, info.pos}] = v;
  }
  for (int k = 0; k < P.num_stages(); ++k) {
    const StagePlan& st = s.stages[static_cast<std::size_t>(k)];
    const std::string kk = " at k=" + std::to_string(P.stage_node(k));
    if (st.node != P.stage_node(k) || static_cast<int>(st.store.size()) != T) {
      throw Error(ErrorCode::kValidation, "stage order does not match the model" + kk);
    }
    const int b = detail::find_bwd_variant(P, k, st.backward_impl);
    if (b < 0) throw Error(ErrorCode::kValidation, "unknown backward impl" + kk);
    set(model.db[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)]);
    for (int p = 1; p <= T; ++p) {
      if (st.store[static_cast<std::size_t>(p - 1)] == 0) continue;
      set(model.s[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)]);
      auto it = aux.find({k, b, p});
      if (it != aux.end()) set(it->second);
    }
    BitVec recomputed(static_cast<std::size_t>(T) + 1, 0);
    for (const auto& [p, impl] : st.recompute) {
      if (p < 1 || p > T) throw Error(ErrorCode::kValidation, "recompute position out of range" + kk);
      recomputed[static_cast<std::size_t>(p)] = 1;
      if (model.vars[static_cast<std::size_t>(model.r[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)])].fixed_zero) {
        throw Error(ErrorCode::kValidation, "recompute of " + label(P, p) + " past the frontier" + kk);
      }
      set(model.r[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)]);
      if (P.is_intermediate(p)) continue;
      int l = detail::find_fwd_variant(P, p, impl);
      if (l < 0) throw Error(ErrorCode::kValidation, "unknown recompute impl for " + label(P, p) + kk);
      set(model.dr[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(l)]);
    }
    BitVec overwritten(static_cast<std::size_t>(T) + 1, 0);
    for (int p : st.inplace) {
      if (p < 1 || p > T) throw Error(ErrorCode::kValidation, "in-place position out of range" + kk);
      set(model.q[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)]);
      overwritten[static_cast<std::size_t>(P.inplace_input[static_cast<std::size_t>(p - 1)])] = 1;
    }
    for (int j = 1; j <= T; ++j) {
      const int pv = model.p[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)];
      if (pv >= 0 && recomputed[static_cast<std::size_t>(j)] != 0 && overwritten[static_cast<std::size_t>(j)] == 0) set(pv);
    }
  }
  return a;
}

}  // namespace ckptopt
