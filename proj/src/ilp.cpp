// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include "ckptopt/ilp.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "json_util.hpp"

namespace ckptopt {

const char* to_string(VarKind kind) {
  switch (kind) {
    case VarKind::kStoreFwd: return "sf";
    case VarKind::kStore: return "s";
    case VarKind::kRecompute: return "r";
    case VarKind::kDeltaFwd: return "df";
    case VarKind::kDeltaRe: return "dr";
    case VarKind::kDeltaBwd: return "db";
    case VarKind::kP: return "p";
    case VarKind::kQ: return "q";
    case VarKind::kAux: return "a";
  }
  return "?";
}

const char* to_string(Sense sense) {
  switch (sense) {
    case Sense::kLe: return "<=";
    case Sense::kGe: return ">=";
    case Sense::kEq: return "=";
  }
  return "?";
}

namespace {

bool contains(const std::vector<int>& sorted, int v) { return std::binary_search(sorted.begin(), sorted.end(), v); }

class Row {
 public:
  void add(int var, std::int64_t coef) {
    if (var < 0) throw Error(ErrorCode::kInternal, "constraint references an absent variable");
    coefs_[var] += coef;
  }
  void add_const(std::int64_t c) { constant_ += c; }

  LinearConstraint finish(Sense sense, std::int64_t rhs, const std::string& tag, const std::string& name) const {
    LinearConstraint c;
    for (const auto& [var, coef] : coefs_) {
      if (coef != 0) c.terms.push_back({var, Rational(coef)});
    }
    c.sense = sense;
    c.constant = Rational(constant_);
    c.rhs = Rational(rhs);
    c.tag = tag;
    c.name = name;
    return c;
  }

 private:
  std::map<int, std::int64_t> coefs_;
  std::int64_t constant_ = 0;
};

class ModelBuilder {
 public:
  ModelBuilder(const Problem& problem, Bytes budget, const IlpOptions& options) : P(problem) {
    m.problem = std::make_shared<const Problem>(problem);
    m.budget = budget;
    m.options = options;
    rhs_mem = budget + options.memory_rhs_delta;
  }

  IlpModel build() {
    declare_vars();
    forward_constraints();
    for (int k = 0; k < P.num_stages(); ++k) stage_constraints(k);
    objective();
    return std::move(m);
  }

 private:
  const Problem& P;
  IlpModel m;
  Bytes rhs_mem = 0;
  std::map<std::tuple<int, int, int>, int> aux;  // (stage, variant, pos) -> var
  std::vector<std::vector<int>> eligible_input;  // [stage][p - 1]: overwritten input when q exists

  int T() const { return P.num_tensors(); }
  std::string K(int stage) const { return std::to_string(P.stage_node(stage)); }

  int add_var(VarKind kind, int stage, int pos, int variant, std::string name, bool fixed_zero = false) {
    m.vars.push_back({kind, stage, pos, variant, std::move(name), fixed_zero});
    return m.num_vars() - 1;
  }

  void push(const Row& row, Sense sense, std::int64_t rhs, const std::string& tag, const std::string& name) {
    m.constraints.push_back(row.finish(sense, rhs, tag, name));
  }

  int in_row(int stage, int pos) const {
    return stage == 0 ? m.sf[static_cast<std::size_t>(pos - 1)]
                      : m.s[static_cast<std::size_t>(stage - 1)][static_cast<std::size_t>(pos - 1)];
  }
  int out_row(int stage, int pos) const { return m.s[static_cast<std::size_t>(stage)][static_cast<std::size_t>(pos - 1)]; }
  int rvar(int stage, int pos) const { return m.r[static_cast<std::size_t>(stage)][static_cast<std::size_t>(pos - 1)]; }
  int pvar(int stage, int pos) const { return m.p[static_cast<std::size_t>(stage)][static_cast<std::size_t>(pos - 1)]; }
  int qvar(int stage, int pos) const { return m.q[static_cast<std::size_t>(stage)][static_cast<std::size_t>(pos - 1)]; }
  int dbvar(int stage, int l) const { return m.db[static_cast<std::size_t>(stage)][static_cast<std::size_t>(l)]; }
  bool r_fixed(int stage, int pos) const { return pos > P.frontier(stage); }

  // Product of "variant l selected" and "x_pos held during backward".
  int alpha(int stage, int l, int pos) {
    if (P.bwd[static_cast<std::size_t>(stage)].size() == 1) return out_row(stage, pos);
    auto key = std::make_tuple(stage, l, pos);
    auto it = aux.find(key);
    if (it != aux.end()) return it->second;
    int v = add_var(VarKind::kAux, stage, pos, l, "a_" + K(stage) + "_" + std::to_string(l) + "_" + std::to_string(pos));
    aux.emplace(key, v);
    return v;
  }

  void declare_vars() {
    const int n = T();
    m.sf.assign(static_cast<std::size_t>(n), -1);
    m.df.assign(static_cast<std::size_t>(n), {});
    for (int p = 1; p <= n; ++p) {
      m.sf[static_cast<std::size_t>(p - 1)] = add_var(VarKind::kStoreFwd, -1, p, -1, "sf_" + std::to_string(p));
      if (P.is_intermediate(p)) continue;
      for (std::size_t l = 0; l < P.fwd_variants(p).size(); ++l) {
        m.df[static_cast<std::size_t>(p - 1)].push_back(
            add_var(VarKind::kDeltaFwd, -1, p, static_cast<int>(l), "df_" + std::to_string(p) + "_" + std::to_string(l)));
      }
    }
    const int S = P.num_stages();
    m.s.assign(static_cast<std::size_t>(S), std::vector<int>(static_cast<std::size_t>(n), -1));
    m.r = m.s;
    m.p = m.s;
    m.q = m.s;
    m.dr.assign(static_cast<std::size_t>(S), std::vector<std::vector<int>>(static_cast<std::size_t>(n)));
    m.db.assign(static_cast<std::size_t>(S), {});
    eligible_input.assign(static_cast<std::size_t>(S), std::vector<int>(static_cast<std::size_t>(n), 0));
    for (int k = 0; k < S; ++k) {
      const std::string kk = K(k);
      for (std::size_t l = 0; l < P.bwd[static_cast<std::size_t>(k)].size(); ++l) {
        m.db[static_cast<std::size_t>(k)].push_back(
            add_var(VarKind::kDeltaBwd, k, 0, static_cast<int>(l), "db_" + kk + "_" + std::to_string(l)));
      }
      for (int p = 1; p <= n; ++p) {
        m.s[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)] =
            add_var(VarKind::kStore, k, p, -1, "s_" + kk + "_" + std::to_string(p));
      }
      for (int p = 1; p <= n; ++p) {
        m.r[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)] =
            add_var(VarKind::kRecompute, k, p, -1, "r_" + kk + "_" + std::to_string(p), r_fixed(k, p));
      }
      for (int p = 1; p <= n; ++p) {
        if (P.is_intermediate(p)) continue;
        for (std::size_t l = 0; l < P.fwd_variants(p).size(); ++l) {
          m.dr[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)].push_back(add_var(
              VarKind::kDeltaRe, k, p, static_cast<int>(l),
              "dr_" + kk + "_" + std::to_string(p) + "_" + std::to_string(l)));
        }
      }
      if (!m.options.inplace) continue;
      std::set<int> inputs;
      for (int p = 1; p <= n; ++p) {
        int j = P.inplace_input[static_cast<std::size_t>(p - 1)];
        if (j == 0 || r_fixed(k, p)) continue;
        eligible_input[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)] = j;
        m.q[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)] =
            add_var(VarKind::kQ, k, p, -1, "q_" + kk + "_" + std::to_string(p));
        inputs.insert(j);
      }
      for (int j : inputs) {
        m.p[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)] =
            add_var(VarKind::kP, k, j, -1, "p_" + kk + "_" + std::to_string(j));
      }
    }
  }

  void forward_constraints() {
    const int n = T();
    for (int p = 1; p <= n; ++p) {
      Row row;
      row.add_const(P.params() + P.bytes(p));
      const auto& local = P.sets.local_fwd[static_cast<std::size_t>(p - 1)];
      if (!P.is_intermediate(p)) {
        const auto& vs = P.fwd_variants(p);
        for (std::size_t l = 0; l < vs.size(); ++l) row.add(m.df[static_cast<std::size_t>(p - 1)][l], vs[l].workspace);
      }
      for (int j = 1; j < p; ++j) {
        if (contains(local, j)) {
          row.add_const(P.bytes(j));
        } else {
          row.add(m.sf[static_cast<std::size_t>(j - 1)], P.bytes(j));
        }
      }
      push(row, Sense::kLe, rhs_mem, "Eq1", "Eq1_" + std::to_string(p));
    }
    for (int p = 1; p <= n; ++p) {
      if (P.is_intermediate(p)) continue;
      Row row;
      for (int v : m.df[static_cast<std::size_t>(p - 1)]) row.add(v, 1);
      push(row, Sense::kEq, 1, "onehot", "onehot_df_" + std::to_string(p));
    }
  }

  void stage_constraints(int k) {
    const int n = T();
    const std::string kk = K(k);
    const auto& variants = P.bwd[static_cast<std::size_t>(k)];
    const Bytes grads = P.sets.grad_local_bytes[static_cast<std::size_t>(k)];

    {
      Row row;
      for (int v : m.db[static_cast<std::size_t>(k)]) row.add(v, 1);
      push(row, Sense::kEq, 1, "onehot", "onehot_db_" + kk);
    }
    for (int p = 1; p <= n; ++p) {
      if (P.is_intermediate(p)) continue;
      Row row;
      for (int v : m.dr[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)]) row.add(v, 1);
      row.add(rvar(k, p), -1);
      push(row, Sense::kEq, 0, "onehot", "onehot_dr_" + kk + "_" + std::to_string(p));
    }

    {  // backward_k peak
      Row row;
      row.add_const(P.params() + P.grad_bytes[static_cast<std::size_t>(k)] + grads);
      for (std::size_t l = 0; l < variants.size(); ++l) {
        int db = dbvar(k, static_cast<int>(l));
        row.add(db, variants[l].workspace);
        for (int j = 1; j <= n; ++j) {
          if (contains(variants[l].deps, j)) {
            row.add(db, P.bytes(j));
          } else {
            row.add(alpha(k, static_cast<int>(l), j), P.bytes(j));
          }
        }
      }
      push(row, Sense::kLe, rhs_mem, "Eq5", "Eq5_" + kk);
    }

    for (int p = 1; p <= n; ++p) {
      if (r_fixed(k, p)) continue;
      Row row;
      row.add_const(P.params() + grads);
      const int r = rvar(k, p);
      if (!P.is_intermediate(p)) {
        const auto& vs = P.fwd_variants(p);
        for (std::size_t l = 0; l < vs.size(); ++l) {
          row.add(m.dr[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)][l], vs[l].workspace);
        }
      }
      row.add(r, P.bytes(p));
      if (qvar(k, p) >= 0) row.add(qvar(k, p), -P.bytes(p));
      const auto& local = P.local_bound(k, p);
      for (int j = 1; j < p; ++j) {
        if (contains(local, j)) {
          row.add(r, P.bytes(j));
          continue;
        }
        for (std::size_t l = 0; l < variants.size(); ++l) {
          if (contains(variants[l].deps, j)) {
            row.add(dbvar(k, static_cast<int>(l)), P.bytes(j));
          } else {
            row.add(alpha(k, static_cast<int>(l), j), P.bytes(j));
          }
        }
      }
      for (int j = p + 1; j <= n; ++j) row.add(in_row(k, j), P.bytes(j));
      push(row, Sense::kLe, rhs_mem, "Eq6", "Eq6_" + kk + "_" + std::to_string(p));
    }

    for (int p = 1; p <= n; ++p) {
      Row row;
      row.add_const(P.params() + grads);
      for (int j = 1; j <= p; ++j) {
        for (std::size_t l = 0; l < variants.size(); ++l) {
          if (contains(variants[l].deps, j)) {
            row.add(dbvar(k, static_cast<int>(l)), P.bytes(j));
          } else {
            row.add(alpha(k, static_cast<int>(l), j), P.bytes(j));
          }
        }
      }
      for (int j = p + 1; j <= n; ++j) row.add(in_row(k, j), P.bytes(j));
      push(row, Sense::kLe, rhs_mem, "C2S", "C2S_" + kk + "_" + std::to_string(p));
    }

    // Recomputation needs its inputs; only held or recomputed tensors can be kept.
    for (int p = 1; p <= n; ++p) {
      if (r_fixed(k, p)) continue;
      const int r = rvar(k, p);
      if (P.is_intermediate(p)) {
        Row row;
        row.add(r, 1);
        row.add(rvar(k, P.inputs(p).front()), -1);
        push(row, Sense::kLe, 0, "intermediate", "Int_" + kk + "_" + std::to_string(p));
        continue;
      }
      for (int j : P.inputs(p)) {
        const std::string base = "Eq7a_" + kk + "_" + std::to_string(p) + "_" + std::to_string(j);
        const int pj = pvar(k, j);
        const bool own = eligible_input[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)] == j;
        if (pj < 0 || own) {
          Row row;
          row.add(r, 1);
          row.add(out_row(k, j), -1);
          row.add(rvar(k, j), -1);
          push(row, Sense::kLe, 0, "Eq7", base);
        }
        if (pj >= 0) {
          Row row;
          row.add(r, 1);
          row.add(out_row(k, j), -1);
          row.add(pj, -1);
          if (own) row.add(qvar(k, p), -1);
          push(row, Sense::kLe, 0, "Eq7", base + "_p");
        }
      }
    }
    for (int p = 1; p <= n; ++p) {
      Row row;
      row.add(out_row(k, p), 1);
      row.add(in_row(k, p), -1);
      if (!r_fixed(k, p)) row.add(rvar(k, p), -1);
      push(row, Sense::kLe, 0, "Eq7", "Eq7b_" + kk + "_" + std::to_string(p));
    }

    for (std::size_t l = 0; l < variants.size(); ++l) {
      for (int j : variants[l].deps) {
        Row row;
        row.add(out_row(k, j), 1);
        if (pvar(k, j) >= 0) {
          row.add(pvar(k, j), 1);
        } else if (!r_fixed(k, j)) {
          row.add(rvar(k, j), 1);
        }
        row.add(dbvar(k, static_cast<int>(l)), -1);
        push(row, Sense::kGe, 0, "Eq8", "Eq8_" + kk + "_" + std::to_string(l) + "_" + std::to_string(j));
      }
    }

    if (m.options.inplace) inplace_constraints(k);

    for (const auto& [key, v] : aux) {
      if (std::get<0>(key) != k) continue;
      const int db = dbvar(k, std::get<1>(key));
      const int sv = out_row(k, std::get<2>(key));
      const std::string nm = m.vars[static_cast<std::size_t>(v)].name;
      Row ge;
      ge.add(v, 1);
      ge.add(db, -1);
      ge.add(sv, -1);
      push(ge, Sense::kGe, -1, "linearization", "Lin_" + nm + "_ge");
      Row le1;
      le1.add(v, 1);
      le1.add(db, -1);
      push(le1, Sense::kLe, 0, "linearization", "Lin_" + nm + "_db");
      Row le2;
      le2.add(v, 1);
      le2.add(sv, -1);
      push(le2, Sense::kLe, 0, "linearization", "Lin_" + nm + "_s");
    }
  }

  void inplace_constraints(int k) {
    const int n = T();
    const std::string kk = K(k);
    std::map<int, std::vector<int>> by_input;
    for (int i = 1; i <= n; ++i) {
      int j = eligible_input[static_cast<std::size_t>(k)][static_cast<std::size_t>(i - 1)];
      if (j == 0) continue;
      by_input[j].push_back(i);
      const int q = qvar(k, i);
      const int pj = pvar(k, j);
      const std::string sfx = kk + "_" + std::to_string(i);
      Row a;
      a.add(pj, 1);
      a.add(rvar(k, j), -1);
      a.add(q, 2);
      push(a, Sense::kGe, 0, "inplace", "Inp_pge_" + sfx);
      Row b;
      b.add(pj, 1);
      b.add(q, 2);
      push(b, Sense::kLe, 2, "inplace", "Inp_ple_" + sfx);
      Row c;
      c.add(out_row(k, j), 1);
      c.add(q, 2);
      push(c, Sense::kLe, 2, "inplace", "Inp_s_" + sfx);
      Row d;
      d.add(q, 1);
      d.add(rvar(k, i), -1);
      push(d, Sense::kLe, 0, "inplace", "Inp_qr_" + sfx);
      Row e;
      e.add(q, 1);
      const auto& vs = P.fwd_variants(i);
      for (std::size_t l = 0; l < vs.size(); ++l) {
        if (vs[l].inplace) e.add(m.dr[static_cast<std::size_t>(k)][static_cast<std::size_t>(i - 1)][l], -1);
      }
      push(e, Sense::kLe, 0, "inplace", "Inp_impl_" + sfx);
    }
    for (const auto& [j, consumers] : by_input) {
      Row row;
      row.add(pvar(k, j), 1);
      row.add(rvar(k, j), -1);
      push(row, Sense::kLe, 0, "inplace", "Inp_pr_" + kk + "_" + std::to_string(j));
      if (consumers.size() > 1) {
        Row once;
        for (int i : consumers) once.add(qvar(k, i), 1);
        push(once, Sense::kLe, 1, "inplace", "Inp_once_" + kk + "_" + std::to_string(j));
      }
    }
  }

  void objective() {
    std::map<int, Rational> obj;
    const int n = T();
    for (int p = 1; p <= n; ++p) {
      if (P.is_intermediate(p)) continue;
      const auto& vs = P.fwd_variants(p);
      for (std::size_t l = 0; l < vs.size(); ++l) {
        obj[m.df[static_cast<std::size_t>(p - 1)][l]] += vs[l].cost;
        for (int k = 0; k < P.num_stages(); ++k) {
          obj[m.dr[static_cast<std::size_t>(k)][static_cast<std::size_t>(p - 1)][l]] += vs[l].cost;
        }
      }
    }
    for (int k = 0; k < P.num_stages(); ++k) {
      const auto& variants = P.bwd[static_cast<std::size_t>(k)];
      for (std::size_t l = 0; l < variants.size(); ++l) obj[dbvar(k, static_cast<int>(l))] += variants[l].cost;
    }
    for (const auto& [v, c] : obj) {
      if (c != Rational(0)) m.objective.push_back({v, c});
    }
  }
};

}  // namespace

IlpModel build_model(const Problem& problem, Bytes budget, const IlpOptions& options) {
  if (budget < 0) throw Error(ErrorCode::kInvalidArgument, "memory budget must be nonnegative");
  return ModelBuilder(problem, budget, options).build();
}

IlpModel build_model(const ComputationGraph& g, const ImplementationCatalog& catalog, Bytes budget,
                     const IlpOptions& options) {
  return build_model(build_problem(g, catalog, options.ablation, options.bound_kind), budget, options);
}

IlpStats IlpModel::stats() const {
  IlpStats st;
  st.n_vars = num_vars();
  st.n_constraints = static_cast<int>(constraints.size());
  for (const VarInfo& v : vars) {
    st.n_fixed += v.fixed_zero ? 1 : 0;
    st.vars_by_kind[to_string(v.kind)] += 1;
  }
  for (const LinearConstraint& c : constraints) st.by_tag[c.tag] += 1;
  return st;
}

std::string IlpModel::stats_json() const {
  IlpStats st = stats();
  nlohmann::json j;
  j["n_vars"] = st.n_vars;
  j["n_fixed"] = st.n_fixed;
  j["n_constraints"] = st.n_constraints;
  j["constraints_by_tag"] = st.by_tag;
  j["vars_by_kind"] = st.vars_by_kind;
  j["budget"] = budget;
  j["inplace"] = options.inplace;
  j["bound"] = to_string(options.bound_kind);
  j["ablation"] = to_string(options.ablation);
  return j.dump(2) + "\n";
}

Evaluation evaluate_assignment(const IlpModel& model, const BitVec& assignment) {
  if (assignment.size() != static_cast<std::size_t>(model.num_vars())) {
    throw Error(ErrorCode::kInvalidArgument, "assignment length " + std::to_string(assignment.size()) +
                                                 " does not match variable count " + std::to_string(model.num_vars()));
  }
  Evaluation ev;
  std::set<std::string> seen;
  auto violate = [&](const std::string& tag) {
    if (seen.insert(tag).second) ev.violated.push_back(tag);
  };
  for (int v = 0; v < model.num_vars(); ++v) {
    if (assignment[static_cast<std::size_t>(v)] > 1) throw Error(ErrorCode::kInvalidArgument, "assignment is not 0/1");
    if (model.vars[static_cast<std::size_t>(v)].fixed_zero && assignment[static_cast<std::size_t>(v)] != 0) {
      violate("fixing");
    }
  }
  for (const LinearConstraint& c : model.constraints) {
    Rational lhs = c.constant;
    for (const Term& t : c.terms) {
      if (assignment[static_cast<std::size_t>(t.var)] != 0) lhs += t.coef;
    }
    bool ok = c.sense == Sense::kLe ? lhs <= c.rhs : c.sense == Sense::kGe ? lhs >= c.rhs : lhs == c.rhs;
    if (!ok) violate(c.tag);
  }
  for (const Term& t : model.objective) {
    if (assignment[static_cast<std::size_t>(t.var)] != 0) ev.objective += t.coef;
  }
  ev.feasible = ev.violated.empty();
  return ev;
}

namespace {

std::int64_t scale_of(const std::vector<Term>& terms, std::initializer_list<Rational> extra) {
  std::int64_t scale = 1;
  for (const Term& t : terms) scale = checked_lcm(scale, t.coef.den());
  for (const Rational& r : extra) scale = checked_lcm(scale, r.den());
  return scale;
}

std::string scaled(const Rational& value, std::int64_t scale) {
  Rational v = value * Rational(scale);
  return std::to_string(v.num());
}

void write_terms(std::string& out, const IlpModel& model, const std::vector<Term>& terms, std::int64_t scale) {
  if (terms.empty()) {
    out += " 0 " + model.vars.front().name;
    return;
  }
  int on_line = 0;
  for (const Term& t : terms) {
    Rational v = t.coef * Rational(scale);
    if (on_line == 8) {
      out += "\n  ";
      on_line = 0;
    }
    out += v.num() < 0 ? " - " : " + ";
    out += std::to_string(v.num() < 0 ? -v.num() : v.num());
    out += " " + model.vars[static_cast<std::size_t>(t.var)].name;
    ++on_line;
  }
}

}  // namespace

std::string export_lp(const IlpModel& model) {
  if (model.vars.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot export a model without variables");
  std::string out;
  const std::int64_t obj_scale = scale_of(model.objective, {});
  out += "\\ ckptopt model " + model.problem->graph.name + "\n";
  out += "\\ budget " + std::to_string(model.budget) + " bytes\n";
  out += "\\ objective scale " + std::to_string(obj_scale) + " (divide the optimum by this factor)\n";
  out += "Minimize\n obj:";
  write_terms(out, model, model.objective, obj_scale);
  out += "\nSubject To\n";
  for (const LinearConstraint& c : model.constraints) {
    const std::int64_t scale = scale_of(c.terms, {c.constant, c.rhs});
    out += " " + c.name + ":";
    write_terms(out, model, c.terms, scale);
    out += " ";
    out += to_string(c.sense);
    out += " " + scaled(c.rhs - c.constant, scale) + "\n";
  }
  bool any_fixed = false;
  for (const VarInfo& v : model.vars) {
    if (!v.fixed_zero) continue;
    if (!any_fixed) out += "Bounds\n";
    any_fixed = true;
    out += " " + v.name + " = 0\n";
  }
  out += "Binaries\n";
  int on_line = 0;
  for (const VarInfo& v : model.vars) {
    out += " ";
    out += v.name;
    if (++on_line == 10) {
      out += "\n";
      on_line = 0;
    }
  }
  if (on_line != 0) out += "\n";
  out += "End\n";
  return out;
}

}  // namespace ckptopt
