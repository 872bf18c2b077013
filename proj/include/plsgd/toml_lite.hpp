#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace plsgd::toml {

/// The TOML subset used by experiment configs: `[table]` headers (dotted
/// names allowed), `key = value` pairs, `#` comments, and values that are
/// basic strings, integers, floats (including inf/nan), booleans, or flat
/// arrays of those.
struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<bool, std::int64_t, double, std::string, Array> data;
  int line = 0;

  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_float() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }
};

/// Flat document: keys are full dotted paths ("oracle.sigma").
using Document = std::map<std::string, Value>;

/// Throws ConfigError naming the offending key (or "line N").
Document parse(std::string_view text);

/// Shortest decimal that reads back to the same double, always with a
/// decimal point or exponent so it re-parses as a float.
std::string format_float(double v);

}  // namespace plsgd::toml
