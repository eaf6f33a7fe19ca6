#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sac/ontology.hpp"
#include "sac/parser.hpp"
#include "sac/pdp.hpp"

namespace sac {

struct SubjectRecord {
  std::vector<std::string> concepts;  // SO
  std::vector<AttributeDescriptor> attributes;

  bool operator==(const SubjectRecord&) const = default;
};

struct ObjectRecord {
  std::string path;                   // request path served by the upstream
  std::vector<std::string> concepts;  // OO
  std::vector<AttributeDescriptor> attributes;

  bool operator==(const ObjectRecord&) const = default;
};

/// Declared value domain of a context attribute, used to draw random
/// requests.
struct ValueRange {
  std::string attribute;
  ScalarType type = ScalarType::String;
  std::optional<Scalar> min;
  std::optional<Scalar> max;
  std::vector<Scalar> values;

  bool operator==(const ValueRange&) const = default;
};

/// Registry of known subjects and objects: the source of attributes the
/// enforcement point adds to incoming requests.
class KnowledgeBase {
 public:
  std::map<std::string, SubjectRecord, std::less<>> subjects;
  std::map<std::string, ObjectRecord, std::less<>> objects;
  std::vector<ValueRange> ranges;

  const SubjectRecord* find_subject(std::string_view id) const;
  const ObjectRecord* find_object(std::string_view id) const;
  /// Object id whose registered path equals `path`.
  std::optional<std::string> object_for_path(std::string_view path) const;

  bool operator==(const KnowledgeBase&) const = default;
};

KnowledgeBase parse_registry(std::string_view text);

/// Every registered concept must resolve in SO/OO, every attribute name in AtO.
ValidationReport validate_registry(const KnowledgeBase& kb, const OntologySet& ontologies);

struct EnrichedRequest {
  AccessRequest request;
  std::vector<std::string> conflicts;  // header/registry disagreements, dropped claims
};

/// Builds the decision-point request from a wire request.
///
/// The registry is authoritative: a registered subject's roles come from the
/// registry (declared roles only narrow them to the activated subset), an
/// unregistered subject or object has no concepts. Presented attributes are
/// kept only when their issuer is trusted and they do not contradict a
/// registry attribute with the same id. Attribute values enter the context
/// keyed by attribute id and override environment entries.
EnrichedRequest enrich(const XacmlRequestDoc& doc, const KnowledgeBase& kb,
                       const std::set<std::string>& trusted_soas);

}  // namespace sac
