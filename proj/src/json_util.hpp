// Copyright 2026 The ckptopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "ckptopt/types.hpp"
#include "json.hpp"

namespace ckptopt::detail {

inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, what + ": " + e.what());
  }
}

inline void require_format(const nlohmann::json& doc, const std::string& what) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, what + ": document must be an object");
  if (!doc.contains("format") || !doc["format"].is_number_integer() || doc["format"].get<int>() != 1) {
    throw Error(ErrorCode::kParse, what + ": unsupported or missing format (expected 1)");
  }
}

inline std::int64_t get_int(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::kParse, where + ": missing field '" + key + "'");
  }
  const nlohmann::json& v = obj[key];
  if (!v.is_number_integer()) throw Error(ErrorCode::kParse, where + ": field '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

inline std::int64_t get_int_or(const nlohmann::json& obj, const char* key, std::int64_t fallback,
                               const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return get_int(obj, key, where);
}

inline std::string get_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) {
    throw Error(ErrorCode::kParse, where + ": missing string field '" + key + "'");
  }
  return obj[key].get<std::string>();
}

inline std::string get_string_or(const nlohmann::json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw Error(ErrorCode::kParse, std::string("field '") + key + "' must be a string");
  return obj[key].get<std::string>();
}

inline const nlohmann::json& get_array(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_array()) {
    throw Error(ErrorCode::kParse, where + ": missing array field '" + key + "'");
  }
  return obj[key];
}

/// Accepts integers, strings such as "3/2" or "0.39", and decimal literals.
inline Rational get_rational(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::kParse, where + ": missing field '" + key + "'");
  }
  const nlohmann::json& v = obj[key];
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_float()) return Rational::parse(v.dump());
  throw Error(ErrorCode::kParse, where + ": field '" + key + "' must be a number");
}

/// Integers stay integers; fractions are written as "num/den" strings.
inline nlohmann::json rational_json(const Rational& r) {
  if (r.is_integer()) return r.num();
  return r.str();
}

}  // namespace ckptopt::detail
