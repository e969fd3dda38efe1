// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "ckptopt/costmodel.hpp"
#include "ckptopt/oracle.hpp"
#include "ckptopt/schedule.hpp"
#include "test_util.hpp"

namespace ckptopt {
namespace {

using testing::build;
using testing::chain_spec;
using testing::gen;
using testing::load_fixture;

TEST(LoadCatalog, OneVariantPerNode) {
  auto inst = load_fixture("chain3");
  for (int n = 1; n <= 3; ++n) {
    ASSERT_EQ(inst.c.forward_of(n).size(), 1u);
    EXPECT_EQ(inst.c.forward_of(n)[0].cost, Rational(1));
    ASSERT_EQ(inst.c.backward_of(n).size(), 1u);
  }
}

TEST(LoadCatalog, ConvMenuKeepsOrderAndNonMonotonePoints) {
  auto inst = load_fixture("resnet_toy");
  const auto& fwd = inst.c.forward_of(1);
  std::vector<std::string> names;
  for (const ImplVariant& v : fwd) names.push_back(v.name);
  EXPECT_EQ(names, (std::vector<std::string>{"algo3", "algo2", "algo6", "algo1", "algo5", "algo4", "algo0"}));
  // Not a tradeoff frontier: some variant is worse in both workspace and cost.
  bool dominated = false;
  for (const ImplVariant& a : fwd) {
    for (const ImplVariant& b : fwd) dominated = dominated || (a.workspace < b.workspace && a.cost < b.cost);
  }
  EXPECT_TRUE(dominated);
}

TEST(LoadCatalog, RejectsNegativeCost) {
  auto spec = chain_spec(2);
  spec[1].fwd[0].cost = "-1";
  try {
    build(spec);
    FAIL() << "negative cost accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_NE(std::string(e.what()).find("negative cost"), std::string::npos);
  }
}

TEST(LoadCatalog, SerializeRoundTrips) {
  auto inst = load_fixture("resnet_toy");
  const std::string once = serialize_catalog(inst.c, inst.g);
  EXPECT_EQ(serialize_catalog(load_catalog(once, inst.g), inst.g), once);
}

TEST(Generate, UnitChain) {
  auto inst = gen(GraphKind::kChain, 4);
  ASSERT_EQ(inst.g.num_nodes(), 4);
  for (const Node& n : inst.g.nodes) {
    EXPECT_EQ(n.output_bytes, 1);
    EXPECT_EQ(inst.c.forward_of(n.id).size(), 1u);
    EXPECT_EQ(inst.c.backward_of(n.id).size(), 1u);
  }
}

TEST(Generate, ResidualSkipsEveryTwoNodes) {
  auto inst = gen(GraphKind::kResidual, 8, 0, 7);
  for (const Node& n : inst.g.nodes) {
    if (n.id >= 5 && n.id % 2 == 1) {
      EXPECT_EQ(n.deps, (std::vector<int>{n.id - 3, n.id - 1})) << "node " << n.id;
    } else if (n.id > 1 && n.id < inst.g.num_nodes()) {
      EXPECT_EQ(n.deps, (std::vector<int>{n.id - 1})) << "node " << n.id;
    }
  }
}

TEST(Generate, TwoVariantChainTradesWorkspaceForCost) {
  auto inst = gen(GraphKind::kChain, 16, 2);
  for (int n = 1; n <= 16; ++n) {
    const auto& f = inst.c.forward_of(n);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_LT(f[0].cost, f[1].cost);
    EXPECT_GT(f[0].workspace, f[1].workspace);
  }
  EXPECT_EQ(serialize_catalog(inst.c, inst.g), read_text_file(testing::fixture("chain16v2.catalog.json")));
}

TEST(Generate, Deterministic) {
  for (GraphKind k : {GraphKind::kChain, GraphKind::kResidual, GraphKind::kInceptionToy, GraphKind::kUnetToy}) {
    auto a = gen(k, 9, 0, 3);
    auto b = gen(k, 9, 0, 3);
    EXPECT_EQ(serialize_graph(a.g), serialize_graph(b.g));
    EXPECT_EQ(serialize_catalog(a.c, a.g), serialize_catalog(b.c, b.g));
  }
}

TEST(Ablation, NoneKeepsOneVariant) {
  auto inst = load_fixture("resnet_toy");
  ImplementationCatalog none = apply_ablation(inst.c, AblationMode::kNone);
  for (int n = 1; n <= inst.g.num_nodes(); ++n) {
    EXPECT_EQ(none.forward_of(n).size(), 1u);
    EXPECT_EQ(none.forward_of(n)[0].name, inst.c.forward_of(n)[0].name);
    if (!none.backward_of(n).empty()) {
      EXPECT_EQ(none.backward_of(n).size(), 1u);
    }
  }
}

TEST(Ablation, AllIsIdentity) {
  auto inst = load_fixture("resnet_toy");
  EXPECT_EQ(serialize_catalog(apply_ablation(inst.c, AblationMode::kAll), inst.g), serialize_catalog(inst.c, inst.g));
}

TEST(Ablation, OutKeepsActivationVariantsAndCollapsesConv) {
  auto inst = load_fixture("resnet_toy");
  ImplementationCatalog out = apply_ablation(inst.c, AblationMode::kOut);
  for (const Node& n : inst.g.nodes) {
    EXPECT_EQ(out.forward_of(n.id).size(), 1u);
    if (n.op == "conv") {
      EXPECT_EQ(out.backward_of(n.id).size(), 1u) << n.id;
    } else {
      std::vector<std::string> names;
      for (const ImplVariant& v : out.backward_of(n.id)) names.push_back(v.name);
      EXPECT_EQ(names, (std::vector<std::string>{"input", "output"})) << n.id;
    }
  }
}

TEST(Ablation, ConvKeepsConvolutionMenus) {
  auto inst = load_fixture("resnet_toy");
  ImplementationCatalog conv = apply_ablation(inst.c, AblationMode::kConv);
  EXPECT_EQ(conv.forward_of(1).size(), 7u);
  EXPECT_EQ(conv.backward_of(1).size(), inst.c.backward_of(1).size());
  EXPECT_EQ(conv.backward_of(3).size(), 1u);
}

TEST(Ablation, IntKeepsMaskVariant) {
  auto inst = load_fixture("resnet_toy");
  ImplementationCatalog in = apply_ablation(inst.c, AblationMode::kInt);
  std::vector<std::string> names;
  for (const ImplVariant& v : in.backward_of(3)) names.push_back(v.name);
  EXPECT_EQ(names, (std::vector<std::string>{"input", "mask"}));
}

// More choices never hurt: checked exhaustively on small instances.
TEST(Ablation, JointModeNeverWorse) {
  for (std::uint64_t seed : {1, 2}) {
    auto inst = gen(GraphKind::kResidual, 5, 2, seed, 32);
    Problem full = build_problem(inst.g, inst.c);
    const Bytes peak = simulate(store_everything(full), full).peak;
    for (Bytes budget : {peak, peak * 3 / 4}) {
      auto opt = [&](AblationMode m) {
        OracleResult r = enumerate(build_problem(inst.g, inst.c, m), budget);
        return r.feasible ? std::optional<Rational>(r.optimum) : std::nullopt;
      };
      auto all = opt(AblationMode::kAll);
      auto none = opt(AblationMode::kNone);
      for (AblationMode m : {AblationMode::kConv, AblationMode::kOut, AblationMode::kInt}) {
        auto mid = opt(m);
        if (mid) {
          ASSERT_TRUE(all.has_value());
          EXPECT_LE(*all, *mid);
        }
        if (none) {
          ASSERT_TRUE(mid.has_value());
          EXPECT_LE(*mid, *none);
        }
      }
    }
  }
}

}  // namespace
}  // namespace ckptopt
