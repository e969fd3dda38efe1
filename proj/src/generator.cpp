// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include "ckptopt/costmodel.hpp"

namespace ckptopt {

const char* to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::kChain: return "chain";
    case GraphKind::kResidual: return "residual";
    case GraphKind::kInceptionToy: return "inception-toy";
    case GraphKind::kUnetToy: return "unet-toy";
  }
  return "chain";
}

GraphKind parse_graph_kind(const std::string& text) {
  if (text == "chain") return GraphKind::kChain;
  if (text == "residual") return GraphKind::kResidual;
  if (text == "inception-toy") return GraphKind::kInceptionToy;
  if (text == "unet-toy") return GraphKind::kUnetToy;
  throw Error(ErrorCode::kInvalidArgument, "unknown graph kind '" + text + "'");
}

namespace {

// (workspace, cost) menus in hundredths of the output size. The forward menu
// follows the shape of measured convolution algorithms: non-monotone, with
// the low-workspace default among the slowest.
struct MenuPoint {
  const char* name;
  int ws;
  int cost;
};

constexpr MenuPoint kConvForward[] = {
    {"algo3", 57, 18}, {"algo2", 86, 5}, {"algo6", 144, 5}, {"algo1", 122, 7},
    {"algo5", 58, 6},  {"algo4", 57, 8}, {"algo0", 230, 39},
};
constexpr MenuPoint kConvBackward[] = {
    {"bwd0", 30, 40}, {"bwd1", 110, 14}, {"bwd2", 75, 20}, {"bwd3", 200, 12},
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Plain modulo keeps the sequence identical across standard libraries.
  int below(int bound) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(bound)); }

 private:
  std::mt19937_64 engine_;
};

Bytes scaled(Bytes size, int hundredths) { return (size * hundredths + 50) / 100; }

struct Builder {
  ComputationGraph g;
  ImplementationCatalog c;
  GenOptions opt;
  Rng rng;

  explicit Builder(const GenOptions& o) : opt(o), rng(o.seed) {}

  int cap(int full) const { return opt.variants <= 0 ? full : std::min(full, opt.variants); }
  Bytes size_of(int node) const { return g.node(node).output_bytes; }
  Rational unit_cost(int node, int hundredths) const {
    Bytes units = std::max<Bytes>(1, size_of(node) / std::max<Bytes>(1, opt.unit_bytes));
    return Rational(hundredths * units, 100);
  }

  void add_node(const std::string& op, Bytes bytes, std::vector<int> deps) {
    Node n;
    n.id = g.num_nodes() + 1;
    n.output_bytes = bytes;
    n.op = op;
    n.deps = std::move(deps);
    g.nodes.push_back(std::move(n));
  }

  // Every dangling node other than the last feeds the last node.
  void close_sink() {
    std::vector<bool> consumed(g.nodes.size() + 1, false);
    for (const Node& n : g.nodes) {
      for (int d : n.deps) consumed[static_cast<std::size_t>(d)] = true;
    }
    Node& last = g.nodes.back();
    for (const Node& n : g.nodes) {
      if (n.id != last.id && !consumed[static_cast<std::size_t>(n.id)]) last.deps.push_back(n.id);
    }
    std::sort(last.deps.begin(), last.deps.end());
  }

  void add_conv(int node) {
    std::vector<ImplVariant> fwd;
    int nf = cap(static_cast<int>(std::size(kConvForward)));
    std::vector<int> picks{0};
    if (nf == 2) {
      picks.push_back(1 + rng.below(static_cast<int>(std::size(kConvForward)) - 1));
    } else {
      for (int i = 1; i < nf; ++i) picks.push_back(i);
    }
    for (int idx : picks) {
      const MenuPoint& m = kConvForward[idx];
      fwd.push_back({m.name, scaled(size_of(node), m.ws), unit_cost(node, m.cost), DepsKind::kInput, false, {}, false});
    }
    c.forward[static_cast<std::size_t>(node)] = fwd;
    std::vector<ImplVariant> bwd;
    BackwardNode b{node, 0, {}};
    int nb = cap(static_cast<int>(std::size(kConvBackward)));
    for (int i = 0; i < nb; ++i) {
      const MenuPoint& m = kConvBackward[i];
      bwd.push_back({m.name, scaled(size_of(node), m.ws), unit_cost(node, m.cost), DepsKind::kInput, false, {}, false});
      b.impls.push_back({m.name, DepsKind::kInput, {}});
    }
    c.backward[static_cast<std::size_t>(node)] = bwd;
    g.backward.push_back(std::move(b));
  }

  // ReLU-like nodes: input-, output- and mask-activated backward variants.
  void add_activation(int node, bool inplace, int fwd_cost) {
    c.forward[static_cast<std::size_t>(node)] = {
        {g.node(node).op, 0, unit_cost(node, fwd_cost), DepsKind::kInput, inplace, {}, false}};
    std::vector<DepsKind> kinds{DepsKind::kInput};
    if (cap(3) >= 3) {
      kinds.push_back(DepsKind::kOutput);
      kinds.push_back(DepsKind::kIntermediate);
    } else if (cap(3) == 2) {
      kinds.push_back(rng.below(2) == 0 ? DepsKind::kOutput : DepsKind::kIntermediate);
    }
    BackwardNode b{node, 0, {}};
    std::vector<ImplVariant> bwd;
    for (DepsKind k : kinds) {
      std::string name = k == DepsKind::kInput ? "input" : k == DepsKind::kOutput ? "output" : "mask";
      int cost = k == DepsKind::kIntermediate ? fwd_cost + 1 : fwd_cost;
      b.impls.push_back({name, k, {}});
      bwd.push_back({name, 0, unit_cost(node, cost), k, false, {}, false});
      if (k == DepsKind::kIntermediate) {
        int id = static_cast<int>(g.intermediates.size()) + 1;
        g.intermediates.push_back({id, std::max<Bytes>(1, size_of(node) / 32), node});
      }
    }
    c.backward[static_cast<std::size_t>(node)] = bwd;
    g.backward.push_back(std::move(b));
  }

  void add_passthrough(int node) {
    c.forward[static_cast<std::size_t>(node)] = {
        {g.node(node).op, 0, unit_cost(node, 1), DepsKind::kInput, false, {}, false}};
    c.backward[static_cast<std::size_t>(node)] = {
        {"split", 0, unit_cost(node, 1), DepsKind::kInput, false, {}, true}};
    g.backward.push_back({node, 0, {{"split", DepsKind::kInput, {}}}});
  }

  void finish_grads() {
    std::sort(g.backward.begin(), g.backward.end(),
              [](const BackwardNode& a, const BackwardNode& b) { return a.node < b.node; });
    for (BackwardNode& b : g.backward) {
      Bytes total = 0;
      for (int d : g.node(b.node).deps) total += size_of(d);
      b.grad_bytes = total;
    }
  }
};

void build_chain(Builder& b) {
  const Bytes u = b.opt.unit_bytes;
  for (int i = 1; i <= b.opt.n; ++i) {
    b.add_node("linear", u, i == 1 ? std::vector<int>{} : std::vector<int>{i - 1});
  }
  b.c.forward.assign(static_cast<std::size_t>(b.opt.n) + 1, {});
  b.c.backward.assign(static_cast<std::size_t>(b.opt.n) + 1, {});
  const bool two = b.opt.variants >= 2;
  for (int i = 1; i <= b.opt.n; ++i) {
    if (two) {
      b.c.forward[static_cast<std::size_t>(i)] = {{"fast", 2 * u, Rational(1), DepsKind::kInput, false, {}, false},
                                                  {"slow", 0, Rational(3, 2), DepsKind::kInput, false, {}, false}};
      b.c.backward[static_cast<std::size_t>(i)] = {{"fast", 2 * u, Rational(1), DepsKind::kInput, false, {}, false},
                                                   {"slow", 0, Rational(3, 2), DepsKind::kInput, false, {}, false}};
      b.g.backward.push_back({i, 0, {{"fast", DepsKind::kInput, {}}, {"slow", DepsKind::kInput, {}}}});
    } else {
      b.c.forward[static_cast<std::size_t>(i)] = {{"default", 0, Rational(1), DepsKind::kInput, false, {}, false}};
      b.c.backward[static_cast<std::size_t>(i)] = {{"default", 0, Rational(1), DepsKind::kInput, false, {}, false}};
      b.g.backward.push_back({i, 0, {{"default", DepsKind::kInput, {}}}});
    }
  }
  b.finish_grads();
}

Bytes random_size(Builder& b) { return b.opt.unit_bytes * (1 + b.rng.below(3)); }

void build_residual(Builder& b) {
  const int n = b.opt.n;
  b.g.params_bytes = b.opt.unit_bytes * b.rng.below(2);
  for (int t = 1; t <= n; ++t) {
    if (t == 1) {
      b.add_node("conv", random_size(b), {});
    } else if (t == 3) {
      b.add_node("relu", b.size_of(2), {2});
    } else if (t % 2 == 0) {
      b.add_node("conv", random_size(b), {t - 1});
    } else {
      b.add_node("add_relu", b.size_of(t - 1), {t - 3, t - 1});
    }
  }
  b.c.forward.assign(static_cast<std::size_t>(n) + 1, {});
  b.c.backward.assign(static_cast<std::size_t>(n) + 1, {});
  for (int t = 1; t <= n; ++t) {
    const std::string& op = b.g.node(t).op;
    if (op == "conv") {
      b.add_conv(t);
    } else {
      b.add_activation(t, op == "relu", op == "relu" ? 2 : 3);
    }
  }
  b.finish_grads();
}

void build_inception(Builder& b) {
  const int n = b.opt.n;
  for (int t = 1; t <= n; ++t) {
    if (t == 1) {
      b.add_node("conv", random_size(b), {});
      continue;
    }
    switch ((t - 2) % 4) {
      case 0: b.add_node("conv", random_size(b), {t - 1}); break;
      case 1: b.add_node("conv", random_size(b), {t - 1}); break;
      case 2: b.add_node("conv", random_size(b), {t - 2}); break;
      default: b.add_node("concat", b.size_of(t - 2) + b.size_of(t - 1), {t - 2, t - 1}); break;
    }
  }
  b.close_sink();
  b.c.forward.assign(static_cast<std::size_t>(n) + 1, {});
  b.c.backward.assign(static_cast<std::size_t>(n) + 1, {});
  for (int t = 1; t <= n; ++t) {
    if (b.g.node(t).op == "concat") {
      b.add_passthrough(t);
    } else {
      b.add_conv(t);
    }
  }
  b.finish_grads();
}

void build_unet(Builder& b) {
  const int n = b.opt.n;
  const int h = (n + 1) / 2;
  for (int t = 1; t <= n; ++t) {
    if (t <= h) {
      Bytes mult = std::max(1, h - t + 1);
      b.add_node("conv", b.opt.unit_bytes * mult, t == 1 ? std::vector<int>{} : std::vector<int>{t - 1});
    } else {
      int mirror = n + 1 - t;
      std::vector<int> deps;
      if (mirror >= 1 && mirror < t - 1) deps.push_back(mirror);
      deps.push_back(t - 1);
      Bytes bytes = mirror >= 1 ? b.size_of(mirror) : b.opt.unit_bytes;
      b.add_node(deps.size() > 1 ? "concat_conv" : "conv", bytes, deps);
    }
  }
  b.close_sink();
  b.c.forward.assign(static_cast<std::size_t>(n) + 1, {});
  b.c.backward.assign(static_cast<std::size_t>(n) + 1, {});
  for (int t = 1; t <= n; ++t) b.add_conv(t);
  b.finish_grads();
}

}  // namespace

std::pair<ComputationGraph, ImplementationCatalog> generate_synthetic(const GenOptions& options) {
  if (options.unit_bytes < 1) throw Error(ErrorCode::kInvalidArgument, "unit size must be positive");
  int min_n = 2;
  switch (options.kind) {
    case GraphKind::kChain: min_n = 2; break;
    case GraphKind::kResidual: min_n = 3; break;
    case GraphKind::kInceptionToy: min_n = 5; break;
    case GraphKind::kUnetToy: min_n = 4; break;
  }
  if (options.n < min_n) {
    throw Error(ErrorCode::kInvalidArgument, std::string("n too small for kind ") + to_string(options.kind) +
                                                 " (minimum " + std::to_string(min_n) + ")");
  }
  if (options.n > 100000) throw Error(ErrorCode::kInvalidArgument, "n too large");
  Builder b(options);
  b.g.name = std::string(to_string(options.kind)) + "-" + std::to_string(options.n) + "-s" + std::to_string(options.seed);
  b.c.cost_unit = "synthetic";
  switch (options.kind) {
    case GraphKind::kChain: build_chain(b); break;
    case GraphKind::kResidual: build_residual(b); break;
    case GraphKind::kInceptionToy: build_inception(b); break;
    case GraphKind::kUnetToy: build_unet(b); break;
  }
  validate_graph(b.g);
  return {std::move(b.g), std::move(b.c)};
}

}  // namespace ckptopt
