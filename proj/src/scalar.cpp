#include "sac/scalar.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "sac/error.hpp"

namespace sac {

ScalarType type_of(const Scalar& value) {
  switch (value.index()) {
    case 0: return ScalarType::String;
    case 1: return ScalarType::Int;
    case 2: return ScalarType::Bool;
    default: return ScalarType::Decimal;
  }
}

std::string_view to_string(ScalarType type) {
  switch (type) {
    case ScalarType::String: return "string";
    case ScalarType::Int: return "int";
    case ScalarType::Bool: return "bool";
    case ScalarType::Decimal: return "decimal";
  }
  return "string";
}

std::optional<ScalarType> parse_scalar_type(std::string_view text) {
  if (text == "string") return ScalarType::String;
  if (text == "int" || text == "integer") return ScalarType::Int;
  if (text == "bool" || text == "boolean") return ScalarType::Bool;
  if (text == "decimal") return ScalarType::Decimal;
  return std::nullopt;
}

bool is_numeric(const Scalar& value) {
  return std::holds_alternative<std::int64_t>(value) ||
         std::holds_alternative<double>(value);
}

Scalar parse_scalar(ScalarType type, std::string_view text) {
  auto bad = [&]() {
    return Error(ErrorCode::InvalidDocument,
                 "'" + std::string(text) + "' is not a valid " +
                     std::string(to_string(type)) + " literal");
  };
  switch (type) {
    case ScalarType::String:
      return std::string(text);
    case ScalarType::Int: {
      std::int64_t v = 0;
      auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || end != text.data() + text.size() || text.empty())
        throw bad();
      return v;
    }
    case ScalarType::Bool:
      if (text == "true") return true;
      if (text == "false") return false;
      throw bad();
    case ScalarType::Decimal: {
      double v = 0;
      auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || end != text.data() + text.size() || text.empty() ||
          !std::isfinite(v))
        throw bad();
      return v;
    }
  }
  throw bad();
}

std::string format_scalar(const Scalar& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          char buf[64];
          auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
          return std::string(buf, end);
        }
      },
      value);
}

}  // namespace sac
