#include "sac/error.hpp"

namespace sac {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::WrongOntologyTag: return "WrongOntologyTag";
    case ErrorCode::InvalidIndividualEdge: return "InvalidIndividualEdge";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::UnknownPurpose: return "UnknownPurpose";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::InvalidDocument: return "InvalidDocument";
    case ErrorCode::DuplicateRuleName: return "DuplicateRuleName";
    case ErrorCode::UnknownOntologyRef: return "UnknownOntologyRef";
    case ErrorCode::UnknownConditionType: return "UnknownConditionType";
    case ErrorCode::MissingCategory: return "MissingCategory";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           const std::optional<SourceLocation>& where) {
  std::string out(to_string(code));
  if (where) {
    out += " at line " + std::to_string(where->line) + ", column " +
           std::to_string(where->column);
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<SourceLocation> where)
    : std::runtime_error(format_message(code, message, where)),
      code_(code),
      detail_(message),
      where_(where) {}

}  // namespace sac
