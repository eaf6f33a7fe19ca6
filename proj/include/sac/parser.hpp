#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sac/policy.hpp"

namespace sac {

/// An SPL policy: ordered access rules plus the right categories they use.
struct PolicyDocument {
  std::string source_name;
  std::string format_version = "1.0";
  RightCatalog rights;
  std::vector<AccessRule> rules;

  bool operator==(const PolicyDocument&) const = default;
};

enum class DecisionValue { Permit, Deny, Indeterminate, NotApplicable };

std::string_view to_string(DecisionValue value);
std::optional<DecisionValue> parse_decision_value(std::string_view text);

/// Wire request: Subject, Resource, Action and Environment categories.
struct XacmlRequestDoc {
  std::string subject_id;
  std::vector<std::string> subject_concepts;  // declared roles
  std::vector<AttributeDescriptor> subject_attributes;
  std::string resource_id;
  std::vector<std::string> resource_concepts;
  std::vector<AttributeDescriptor> resource_attributes;
  std::string action_id;
  std::string purpose;
  Context environment;

  bool operator==(const XacmlRequestDoc&) const = default;
};

struct XacmlResponseDoc {
  DecisionValue decision = DecisionValue::NotApplicable;
  std::string status;
  std::optional<std::string> granted_right;
  std::optional<std::string> trace_rule;  // the deciding rule
  std::vector<std::string> trace;         // empty and omitted when masked

  bool operator==(const XacmlResponseDoc&) const = default;
};

PolicyDocument parse_spl_policy(std::string_view text);
std::string serialize_policy(const PolicyDocument& doc);

/// Parses a standalone `<rule>` document.
AccessRule parse_rule(std::string_view text);
std::string serialize_rule(const AccessRule& rule);

PurposeTree parse_purpose_tree(std::string_view text);
std::string serialize_purpose_tree(const PurposeTree& tree);

XacmlRequestDoc parse_xacml_request(std::string_view text);
std::string serialize_xacml_request(const XacmlRequestDoc& req);

XacmlResponseDoc parse_xacml_response(std::string_view text);
std::string serialize_xacml_response(const XacmlResponseDoc& resp);

}  // namespace sac
