// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ckptopt/problem.hpp"

namespace ckptopt::detail {

inline int find_fwd_variant(const Problem& p, int pos, const std::string& name) {
  const auto& vs = p.fwd_variants(pos);
  for (std::size_t l = 0; l < vs.size(); ++l) {
    if (vs[l].name == name) return static_cast<int>(l);
  }
  return -1;
}

inline int find_bwd_variant(const Problem& p, int stage, const std::string& name) {
  const auto& vs = p.bwd.at(static_cast<std::size_t>(stage));
  for (std::size_t l = 0; l < vs.size(); ++l) {
    if (vs[l].name == name) return static_cast<int>(l);
  }
  return -1;
}

inline std::string bits_to_string(const BitVec& bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) out.push_back(b != 0 ? '1' : '0');
  return out;
}

}  // namespace ckptopt::detail
