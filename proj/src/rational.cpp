// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "ckptopt/types.hpp"

namespace ckptopt {
namespace {

std::int64_t narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorCode::kInternal, "rational arithmetic overflow");
  }
  return static_cast<std::int64_t>(v);
}

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::kParse, "invalid number '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = 1;
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::parse(std::string_view text) {
  std::string_view whole = text;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int(text.substr(0, slash), whole), parse_int(text.substr(slash + 1), whole));
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    bool negative = !text.empty() && text.front() == '-';
    std::string_view int_part = text.substr(negative ? 1 : 0, dot - (negative ? 1 : 0));
    std::string_view frac_part = text.substr(dot + 1);
    if (frac_part.empty() || frac_part.size() > 17) {
      throw Error(ErrorCode::kParse, "invalid number '" + std::string(whole) + "'");
    }
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    std::int64_t ip = int_part.empty() ? 0 : parse_int(int_part, whole);
    std::int64_t fp = parse_int(frac_part, whole);
    if (ip < 0 || fp < 0) throw Error(ErrorCode::kParse, "invalid number '" + std::string(whole) + "'");
    std::int64_t n = narrow(static_cast<__int128>(ip) * scale + fp);
    return Rational(negative ? -n : n, scale);
  }
  return Rational(parse_int(text, whole));
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string Rational::to_decimal(int digits) const {
  __int128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  __int128 n = static_cast<__int128>(num_) * scale;
  bool negative = n < 0;
  if (negative) n = -n;
  __int128 q = n / den_;
  __int128 r = n % den_;
  if (2 * r >= den_) ++q;
  std::int64_t ipart = static_cast<std::int64_t>(q / scale);
  std::int64_t fpart = static_cast<std::int64_t>(q % scale);
  std::string out = (negative && q != 0 ? "-" : "") + std::to_string(ipart);
  if (digits > 0) {
    std::string frac = std::to_string(fpart);
    out += "." + std::string(static_cast<std::size_t>(digits) - frac.size(), '0') + frac;
  }
  return out;
}

Rational& Rational::operator+=(const Rational& o) {
  __int128 n = static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_;
  __int128 d = static_cast<__int128>(den_) * o.den_;
  __int128 a = n < 0 ? -n : n;
  __int128 b = d;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a == 0) a = 1;
  *this = Rational(narrow(n / a), narrow(d / a));
  return *this;
}

Rational& Rational::operator*=(const Rational& o) {
  std::int64_t g1 = std::gcd(num_, o.den_);
  std::int64_t g2 = std::gcd(o.num_, den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  *this = Rational(narrow(static_cast<__int128>(num_ / g1) * (o.num_ / g2)),
                   narrow(static_cast<__int128>(den_ / g2) * (o.den_ / g1)));
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.num_ == 0) throw Error(ErrorCode::kInvalidArgument, "division by zero");
  return *this *= Rational(o.den_, o.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  __int128 l = static_cast<__int128>(a.num_) * b.den_;
  __int128 r = static_cast<__int128>(b.num_) * a.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
  std::int64_t g = std::gcd(a, b);
  return narrow(static_cast<__int128>(a / g) * b);
}

}  // namespace ckptopt
