// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include <json.hpp>

#include "ckptopt/ilp.hpp"
#include "ckptopt/oracle.hpp"
#include "ckptopt/schedule.hpp"
#include "ckptopt/solver.hpp"
#include "test_util.hpp"

namespace ckptopt {
namespace {

using testing::load_fixture;
using testing::problem_of;

constexpr Bytes kBig = Bytes{1} << 40;

IlpModel model_of(const std::string& stem, Bytes budget = kBig, bool inplace = false) {
  IlpOptions o;
  o.inplace = inplace;
  return build_model(problem_of(load_fixture(stem)), budget, o);
}

bool has(const std::vector<std::string>& v, const std::string& x) { return std::find(v.begin(), v.end(), x) != v.end(); }

int count_tag(const IlpModel& m, const std::string& tag) {
  return static_cast<int>(std::count_if(m.constraints.begin(), m.constraints.end(),
                                        [&](const LinearConstraint& c) { return c.tag == tag; }));
}

bool satisfied(const LinearConstraint& c, const std::map<int, int>& values) {
  Rational lhs = c.constant;
  for (const Term& t : c.terms) {
    if (values.at(t.var) != 0) lhs += t.coef;
  }
  return c.sense == Sense::kLe ? lhs <= c.rhs : c.sense == Sense::kGe ? lhs >= c.rhs : lhs == c.rhs;
}

TEST(BuildModel, ChainStoreEverythingCostsSix) {
  IlpModel m = model_of("chain3");
  Evaluation ev = evaluate_assignment(m, encode(m, store_everything(*m.problem)));
  EXPECT_TRUE(ev.feasible);
  EXPECT_EQ(ev.objective, Rational(6));
  SolveResult r = solve(m);
  EXPECT_EQ(r.status, SolveStatus::kOptimal);
  EXPECT_EQ(r.objective, Rational(6));
}

TEST(BuildModel, OneHotRowsPerNodeAndStage) {
  for (const char* stem : {"chain3", "residual8", "resnet_toy"}) {
    IlpModel m = model_of(stem);
    const int n = m.problem->graph.num_nodes();
    const int nb = m.problem->num_stages();
    EXPECT_EQ(count_tag(m, "onehot"), n + nb + n * nb) << stem;
  }
}

TEST(BuildModel, InplaceRowsOnlyWhenEnabled) {
  IlpModel off = model_of("resnet_toy");
  IlpModel on = model_of("resnet_toy", kBig, true);
  auto kinds = [](const IlpModel& m, VarKind k) {
    return std::count_if(m.vars.begin(), m.vars.end(), [&](const VarInfo& v) { return v.kind == k; });
  };
  EXPECT_EQ(kinds(off, VarKind::kP) + kinds(off, VarKind::kQ), 0);
  EXPECT_EQ(count_tag(off, "inplace"), 0);
  EXPECT_GT(kinds(on, VarKind::kQ), 0);
  EXPECT_GT(kinds(on, VarKind::kP), 0);
  EXPECT_GT(count_tag(on, "inplace"), 0);
}

TEST(BuildModel, InplaceNeverRaisesTheOptimum) {
  auto inst = testing::gen(GraphKind::kResidual, 5, 1, 2, 32);
  Problem p = problem_of(inst);
  const Bytes peak = simulate(store_everything(p), p).peak;
  for (Bytes budget : {peak, peak * 2 / 3}) {
    OracleOptions with;
    with.inplace = true;
    OracleResult a = enumerate(p, budget);
    OracleResult b = enumerate(p, budget, with);
    if (!a.feasible) continue;
    ASSERT_TRUE(b.feasible);
    EXPECT_LE(b.optimum, a.optimum);
  }
}

TEST(BuildModel, CountsAreDeterministic) {
  IlpModel a = model_of("residual8", 4096, true);
  IlpModel b = model_of("residual8", 4096, true);
  EXPECT_EQ(a.stats_json(), b.stats_json());
  ASSERT_EQ(a.num_vars(), b.num_vars());
  for (int v = 0; v < a.num_vars(); ++v) EXPECT_EQ(a.vars[static_cast<std::size_t>(v)].name, b.vars[static_cast<std::size_t>(v)].name);
}

TEST(BuildModel, ResidualStatsMatchGolden) {
  IlpModel m = model_of("residual8", 12, true);
  const auto golden = nlohmann::json::parse(read_text_file(testing::fixture("golden/residual8_stats.json")));
  EXPECT_EQ(nlohmann::json::parse(m.stats_json()), golden);
}

TEST(Linearization, AuxEqualsProductInAllFourCases) {
  IlpModel m = model_of("residual8");
  std::map<int, std::vector<const LinearConstraint*>> rows;  // aux var -> its rows
  for (const LinearConstraint& c : m.constraints) {
    if (c.tag != "linearization") continue;
    for (const Term& t : c.terms) {
      if (m.vars[static_cast<std::size_t>(t.var)].kind == VarKind::kAux) rows[t.var].push_back(&c);
    }
  }
  ASSERT_FALSE(rows.empty());
  for (const auto& [aux, cs] : rows) {
    ASSERT_EQ(cs.size(), 3u);
    std::vector<int> factors;
    for (const LinearConstraint* c : cs) {
      for (const Term& t : c->terms) {
        if (t.var != aux && std::find(factors.begin(), factors.end(), t.var) == factors.end()) factors.push_back(t.var);
      }
    }
    ASSERT_EQ(factors.size(), 2u);
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        for (int a = 0; a < 2; ++a) {
          std::map<int, int> val{{factors[0], x}, {factors[1], y}, {aux, a}};
          const bool ok = std::all_of(cs.begin(), cs.end(), [&](const LinearConstraint* c) { return satisfied(*c, val); });
          EXPECT_EQ(ok, a == x * y) << m.vars[static_cast<std::size_t>(aux)].name;
        }
      }
    }
  }
}

TEST(Evaluate, DroppedDependencyViolatesEq8) {
  IlpModel m = model_of("chain3");
  BitVec a = encode(m, store_everything(*m.problem));
  // Stage of node 3 reads x2; drop it from that stage's held row.
  a[static_cast<std::size_t>(m.s[0][1])] = 0;
  Evaluation ev = evaluate_assignment(m, a);
  EXPECT_FALSE(ev.feasible);
  EXPECT_TRUE(has(ev.violated, "Eq8"));
}

TEST(Evaluate, InconsistentAuxViolatesLinearization) {
  IlpModel m = model_of("residual8");
  BitVec a = encode(m, store_everything(*m.problem));
  auto aux = std::find_if(m.vars.begin(), m.vars.end(), [](const VarInfo& v) { return v.kind == VarKind::kAux; });
  ASSERT_NE(aux, m.vars.end());
  auto& bit = a[static_cast<std::size_t>(aux - m.vars.begin())];
  bit = bit ? 0 : 1;
  Evaluation ev = evaluate_assignment(m, a);
  EXPECT_FALSE(ev.feasible);
  EXPECT_TRUE(has(ev.violated, "linearization"));
}

TEST(Evaluate, RejectsWrongLength) {
  IlpModel m = model_of("chain3");
  EXPECT_THROW(evaluate_assignment(m, BitVec(3, 0)), Error);
}

TEST(Evaluate, AgreesWithMemoryModelOnCandidates) {
  auto inst = testing::gen(GraphKind::kResidual, 4, 2, 3, 32);
  Problem p = problem_of(inst);
  const Bytes peak = simulate(store_everything(p), p).peak;
  for (bool inplace : {false, true}) {
    IlpOptions o;
    o.inplace = inplace;
    IlpModel m = build_model(p, peak * 4 / 5, o);
    auto check = [&](const Schedule& s) {
      Judgement j = judge(p, s, m.budget, inplace);
      BitVec a;
      try {
        a = encode(m, s);
      } catch (const Error&) {
        EXPECT_FALSE(j.feasible);
        return false;
      }
      Evaluation ev = evaluate_assignment(m, a);
      EXPECT_EQ(ev.feasible, j.feasible) << serialize_schedule(s);
      if (ev.feasible && j.feasible) {
        EXPECT_EQ(ev.objective, j.cost);
      }
      return ev.feasible;
    };
    for_each_candidate(p, inplace, 20000, [&](const Schedule& s) { check(s); });
    OracleOptions oo;
    oo.inplace = inplace;
    OracleResult best = enumerate(p, m.budget, oo);
    ASSERT_TRUE(best.feasible);
    for (const OracleSchedule& s : best.optimal_schedules) EXPECT_TRUE(check(s.schedule));
  }
}

TEST(ExportLp, SingleVariableModel) {
  IlpModel m = model_of("chain3");
  m.vars.resize(1);
  m.constraints.clear();
  m.objective = {Term{0, Rational(1)}};
  const std::string lp = export_lp(m);
  EXPECT_NE(lp.find("Binaries\n sf_1\nEnd\n"), std::string::npos) << lp;
}

TEST(ExportLp, ChainDocumentShape) {
  const std::string lp = export_lp(model_of("chain3", 100));
  EXPECT_EQ(lp.rfind("\\ ckptopt model", 0), 0u);
  for (const char* section : {"Minimize\n", "Subject To\n", "Bounds\n", "Binaries\n", "End\n"}) {
    EXPECT_NE(lp.find(section), std::string::npos) << section;
  }
  EXPECT_NE(lp.find(" Eq8_3_0_2: - 1 db_3_0 + 1 s_3_2 + 1 r_3_2 >= 0\n"), std::string::npos);
}

TEST(ExportLp, ByteIdenticalOnRebuild) {
  EXPECT_EQ(export_lp(model_of("resnet_toy", 24 << 20, true)), export_lp(model_of("resnet_toy", 24 << 20, true)));
}

}  // namespace
}  // namespace ckptopt
