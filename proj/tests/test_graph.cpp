// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "ckptopt/graph.hpp"
#include "test_util.hpp"

namespace ckptopt {
namespace {

using testing::build;
using testing::chain_spec;
using testing::fixture;
using testing::load_fixture;

std::set<std::pair<int, int>> edges(const ComputationGraph& g) {
  std::set<std::pair<int, int>> out;
  for (const Node& n : g.nodes) {
    for (int d : n.deps) out.emplace(d, n.id);
  }
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(LoadGraph, ChainHasConsecutiveEdges) {
  ComputationGraph g = load_graph_file(fixture("chain3.graph.json"));
  EXPECT_EQ(g.num_nodes(), 3);
  EXPECT_EQ(edges(g), (std::set<std::pair<int, int>>{{1, 2}, {2, 3}}));
  EXPECT_EQ(g.sink(), 3);
}

TEST(LoadGraph, RejectsBackwardPointingEdge) {
  auto spec = chain_spec(3);
  spec[1].deps = {3};
  spec[2].deps = {1};
  const std::string msg = message_of([&] { build(spec); });
  EXPECT_NE(msg.find("non-topological edge (3,2)"), std::string::npos) << msg;
}

TEST(LoadGraph, RejectsStructuralErrors) {
  auto self = chain_spec(2);
  self[1].deps = {2};
  EXPECT_NE(message_of([&] { build(self); }).find("cycle"), std::string::npos);

  auto dangling = chain_spec(2);
  dangling[1].deps = {7};
  EXPECT_NE(message_of([&] { build(dangling); }).find("dangling"), std::string::npos);

  auto two_sinks = chain_spec(3);
  two_sinks[2].deps = {1};
  EXPECT_NE(message_of([&] { build(two_sinks); }).find("exactly one sink"), std::string::npos);

  auto negative = chain_spec(2);
  negative[0].bytes = -1;
  EXPECT_EQ(code_of([&] { build(negative); }), ErrorCode::kValidation);

  EXPECT_EQ(code_of([] { load_graph("{not json"); }), ErrorCode::kParse);
}

TEST(LoadGraph, ResnetToySkipEdges) {
  ComputationGraph g = load_graph_file(fixture("resnet_toy.graph.json"));
  EXPECT_EQ(g.num_nodes(), 20);
  EXPECT_EQ(g.node(5).deps, (std::vector<int>{2, 4}));
}

TEST(LoadGraph, SerializeRoundTrips) {
  ComputationGraph g = load_graph_file(fixture("resnet_toy.graph.json"));
  const std::string once = serialize_graph(g);
  EXPECT_EQ(serialize_graph(load_graph(once)), once);
  EXPECT_EQ(once, read_text_file(fixture("resnet_toy.graph.json")));
}

std::vector<std::string> labels(const DependencySets& s, const std::vector<int>& positions) {
  std::vector<std::string> out;
  for (int p : positions) out.push_back(s.tensor(p).label);
  return out;
}

TEST(DependencySets, ChainLocalSetIsDirectInput) {
  ComputationGraph g = load_graph_file(fixture("chain3.graph.json"));
  DependencySets s = compute_dependency_sets(g);
  EXPECT_EQ(labels(s, s.local_fwd[2]), (std::vector<std::string>{"x2"}));
  EXPECT_TRUE(s.local_fwd[0].empty());
}

TEST(DependencySets, SkipInputStaysLocal) {
  ComputationGraph g = load_graph_file(fixture("resnet_toy.graph.json"));
  DependencySets s = compute_dependency_sets(g);
  const int x2 = s.position_of("x2");
  const int x4 = s.position_of("x4");
  const auto& l4 = s.local_fwd[static_cast<std::size_t>(x4 - 1)];
  EXPECT_TRUE(std::find(l4.begin(), l4.end(), x2) != l4.end());
}

TEST(DependencySets, TightBoundDropsTensorsPastTheFrontier) {
  ComputationGraph g = load_graph_file(fixture("chain3.graph.json"));
  DependencySets upper = compute_dependency_sets(g, BoundKind::kUpper);
  DependencySets tight = compute_dependency_sets(g, BoundKind::kTight);
  // Stage of node 1 recomputing x2: only node 2 reads x1, and node 2 lies
  // past that stage's frontier.
  const int k = static_cast<int>(std::find(tight.stage_nodes.begin(), tight.stage_nodes.end(), 1) - tight.stage_nodes.begin());
  EXPECT_EQ(labels(upper, upper.local_bound[static_cast<std::size_t>(k)][1]), (std::vector<std::string>{"x1"}));
  EXPECT_TRUE(tight.local_bound[static_cast<std::size_t>(k)][1].empty());
}

void expect_tight_within_upper(const ComputationGraph& g) {
  DependencySets upper = compute_dependency_sets(g, BoundKind::kUpper);
  DependencySets tight = compute_dependency_sets(g, BoundKind::kTight);
  for (std::size_t k = 0; k < upper.local_bound.size(); ++k) {
    for (std::size_t p = 0; p < upper.local_bound[k].size(); ++p) {
      const auto& u = upper.local_bound[k][p];
      for (int j : tight.local_bound[k][p]) {
        EXPECT_TRUE(std::binary_search(u.begin(), u.end(), j)) << g.name << " stage " << k << " pos " << p + 1;
      }
    }
  }
}

TEST(DependencySets, TightIsSubsetOfUpper) {
  expect_tight_within_upper(load_graph_file(fixture("resnet_toy.graph.json")));
  expect_tight_within_upper(load_graph_file(fixture("residual8.graph.json")));
  expect_tight_within_upper(testing::gen(GraphKind::kUnetToy, 8).g);
  expect_tight_within_upper(testing::gen(GraphKind::kInceptionToy, 8).g);
}

// Local set at p: earlier tensors some node at or after p still reads.
void expect_local_sets_match_definition(const ComputationGraph& g) {
  DependencySets s = compute_dependency_sets(g);
  const int T = s.num_tensors();
  for (int p = 1; p <= T; ++p) {
    std::vector<int> direct;
    for (int j = 1; j < p; ++j) {
      bool read_later = false;
      for (int t = p; t <= T; ++t) {
        const auto& in = s.fwd_deps[static_cast<std::size_t>(t - 1)];
        read_later = read_later || std::find(in.begin(), in.end(), j) != in.end();
      }
      if (read_later) direct.push_back(j);
    }
    EXPECT_EQ(s.local_fwd[static_cast<std::size_t>(p - 1)], direct) << g.name << " at " << s.tensor(p).label;
  }
}

TEST(DependencySets, LocalSetsMatchDefinition) {
  expect_local_sets_match_definition(load_graph_file(fixture("resnet_toy.graph.json")));
  expect_local_sets_match_definition(load_graph_file(fixture("residual8.graph.json")));
  expect_local_sets_match_definition(testing::gen(GraphKind::kUnetToy, 10).g);
  expect_local_sets_match_definition(testing::gen(GraphKind::kInceptionToy, 9).g);
}

TEST(DependencySets, PureFunctionOfGraph) {
  ComputationGraph g = load_graph_file(fixture("resnet_toy.graph.json"));
  DependencySets a = compute_dependency_sets(g);
  DependencySets b = compute_dependency_sets(g);
  EXPECT_EQ(a.local_fwd, b.local_fwd);
  EXPECT_EQ(a.local_bound, b.local_bound);
  EXPECT_EQ(a.bwd_deps, b.bwd_deps);
  EXPECT_EQ(a.grad_local_bytes, b.grad_local_bytes);
}

TEST(DependencySets, StagesRunInDescendingNodeOrder) {
  DependencySets s = compute_dependency_sets(load_graph_file(fixture("chain3.graph.json")));
  EXPECT_EQ(s.stage_nodes, (std::vector<int>{3, 2, 1}));
}

TEST(DependencySets, IntermediatesFollowTheirCreator) {
  ComputationGraph g = load_graph_file(fixture("resnet_toy.graph.json"));
  DependencySets s = compute_dependency_sets(g);
  const int x3 = s.position_of("x3");
  const int m1 = s.position_of("m1");
  EXPECT_EQ(m1, x3 + 1);
  EXPECT_TRUE(s.tensor(m1).intermediate);
  EXPECT_EQ(s.tensor(m1).node, 3);
}

}  // namespace
}  // namespace ckptopt
