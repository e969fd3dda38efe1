// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "ckptopt/types.hpp"

namespace ckptopt {

Bytes parse_bytes(std::string_view text) {
  struct Suffix {
    std::string_view name;
    std::int64_t scale;
  };
  static constexpr Suffix kSuffixes[] = {{"GiB", 1LL << 30}, {"MiB", 1LL << 20}, {"KiB", 1LL << 10}, {"B", 1}};
  std::string_view number = text;
  std::int64_t scale = 1;
  for (const Suffix& s : kSuffixes) {
    if (number.size() >= s.name.size() && number.substr(number.size() - s.name.size()) == s.name) {
      number.remove_suffix(s.name.size());
      scale = s.scale;
      break;
    }
  }
  while (!number.empty() && number.back() == ' ') number.remove_suffix(1);
  const std::string bad = "invalid byte count '" + std::string(text) + "'";
  if (number.empty() || number.front() == '-' || number.front() == '+' || number.find('/') != std::string_view::npos) throw Error(ErrorCode::kInvalidArgument, bad);
  Rational value;
  try {
    value = Rational::parse(number) * Rational(scale);
  } catch (const Error&) {
    throw Error(ErrorCode::kInvalidArgument, bad);
  }
  if (!value.is_integer()) throw Error(ErrorCode::kInvalidArgument, bad + ": not a whole number of bytes");
  return value.num();
}

const char* version() { return "0.1.0"; }

}  // namespace ckptopt
