#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "portbot/geometry.hpp"

namespace portbot {

/// Dynamically typed value held by program variables and shared memory.
using Value = std::variant<std::monostate, bool, std::int64_t, double, Position3, Region>;

enum class ValueType { None, Bool, Int, Real, Pos, Region };

inline ValueType type_of(const Value& v) { return static_cast<ValueType>(v.index()); }

std::string type_name(ValueType t);

std::string to_string(const Value& v);

} // namespace portbot
