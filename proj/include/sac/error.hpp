#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sac {

enum class ErrorCode {
  // ontology
  CycleDetected,
  DuplicateId,
  DanglingReference,
  WrongOntologyTag,
  InvalidIndividualEdge,
  UnknownConcept,
  // policy
  TypeMismatch,
  UnknownPurpose,
  // parser
  MalformedXml,
  UnknownElement,
  InvalidDocument,
  DuplicateRuleName,
  UnknownOntologyRef,
  UnknownConditionType,
  MissingCategory,
  // store / service
  ValidationFailed,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

struct SourceLocation {
  int line = 0;
  int column = 0;

  bool operator==(const SourceLocation&) const = default;
};

/// Base exception for every failure raised by the engine. Carries a stable
/// code and, for document errors, the location inside the source text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<SourceLocation> where = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<SourceLocation>& location() const noexcept {
    return where_;
  }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<SourceLocation> where_;
};

}  // namespace sac
