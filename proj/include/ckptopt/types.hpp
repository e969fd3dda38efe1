// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ckptopt {

/// Memory quantities are exact integer byte counts.
using Bytes = std::int64_t;

/// Dense 0/1 vector indexed by tensor position or variable index.
using BitVec = std::vector<std::uint8_t>;

enum class ErrorCode {
  kInvalidArgument = 1,
  kParse,
  kValidation,
  kIo,
  kCapExceeded,
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Exact rational number with a positive, reduced denominator. Compute costs
/// are rationals so that objective equality checks never depend on rounding.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  /// Parses "3", "-3/4" or a plain decimal such as "0.39".
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }

  std::string str() const;
  /// Decimal rendering rounded half away from zero.
  std::string to_decimal(int digits) const;
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o) { return *this += -o; }
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::int64_t checked_lcm(std::int64_t a, std::int64_t b);

/// Parses a byte count with an optional B, KiB, MiB or GiB suffix, e.g.
/// "1.5MiB". The result must be a whole number of bytes.
Bytes parse_bytes(std::string_view text);

/// Library version string.
const char* version();

}  // namespace ckptopt
