#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace sac {

enum class ScalarType { String, Int, Bool, Decimal };

/// Typed attribute value. Strings never coerce to numbers.
using Scalar = std::variant<std::string, std::int64_t, bool, double>;

/// Attribute id -> value bindings used when evaluating conditions.
using Context = std::map<std::string, Scalar, std::less<>>;

ScalarType type_of(const Scalar& value);
std::string_view to_string(ScalarType type);
std::optional<ScalarType> parse_scalar_type(std::string_view text);

bool is_numeric(const Scalar& value);

/// Parses `text` as a scalar of the given type; throws Error(InvalidDocument)
/// when the text is not a valid literal of that type.
Scalar parse_scalar(ScalarType type, std::string_view text);

/// Canonical literal text (round-trips through parse_scalar).
std::string format_scalar(const Scalar& value);

}  // namespace sac
