#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sac/error.hpp"
#include "sac/ontology.hpp"
#include "sac/parser.hpp"
#include "sac/policy.hpp"

namespace sac {

/// A fully enriched request as seen by the decision point.
struct AccessRequest {
  std::string subject_id;
  std::set<std::string> subject_concepts;  // SO
  std::vector<AttributeDescriptor> subject_attributes;
  std::string object_id;
  std::set<std::string> object_concepts;  // OO
  std::vector<AttributeDescriptor> object_attributes;
  std::string action;   // AO
  std::string purpose;  // purpose tree id
  Context context;

  bool operator==(const AccessRequest&) const = default;
};

struct Decision {
  DecisionValue value = DecisionValue::NotApplicable;
  std::optional<std::string> granted_right;
  std::optional<std::string> matched_rule;
  std::vector<std::string> explanation;
  bool masked = false;
  std::uint64_t store_version = 0;

  bool operator==(const Decision&) const = default;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Immutable policy snapshot: the active policy together with everything it
/// is interpreted against. Only obtainable through activate(), so every rule
/// has passed validate_rule against the held graphs.
class PolicyStore {
 public:
  /// Throws ValidationError listing every finding.
  static PolicyStore activate(PolicyDocument policy, OntologySet ontologies,
                              PurposeTree purposes, std::set<std::string> trusted_soas,
                              std::uint64_t version = 1);

  /// All findings for the given parts, without throwing.
  static ValidationReport validate(const PolicyDocument& policy, const OntologySet& ontologies,
                                   const PurposeTree& purposes);

  const PolicyDocument& policy() const noexcept { return policy_; }
  const OntologySet& ontologies() const noexcept { return ontologies_; }
  const OntologyGraph& graph(OntologyKind kind) const { return ontologies_.get(kind); }
  const PurposeTree& purposes() const noexcept { return purposes_; }
  const std::set<std::string>& trusted_soas() const noexcept { return trusted_; }
  std::uint64_t version() const noexcept { return version_; }

  bool trusts(const std::string& soa) const { return trusted_.count(soa) != 0; }

 private:
  PolicyStore() = default;

  PolicyDocument policy_;
  OntologySet ontologies_;
  PurposeTree purposes_;
  std::set<std::string> trusted_;
  std::uint64_t version_ = 0;
};

using Trace = std::vector<std::string>;

/// Target matching with semantic expansion. Conjuncts are checked in order
/// (subject, object, action, required attributes, attribute variables) and
/// the first false one stops the match. Throws Error(UnknownConcept) when a
/// consulted request concept is not in its ontology.
bool match_target(const AccessRule& rule, const AccessRequest& req, const PolicyStore& store,
                  Trace* trace = nullptr);

/// Permit, Deny, NotApplicable or Indeterminate for a single rule. Never throws.
DecisionValue evaluate_rule(const AccessRule& rule, const AccessRequest& req,
                            const PolicyStore& store, Trace* trace = nullptr);

/// Precedence among outcomes that share the top priority.
enum class CombiningOrder {
  DenyPermitIndeterminate,
  PermitDenyIndeterminate,
  DenyIndeterminatePermit,
};

/// Rank of `value` under `order`; larger wins.
int precedence(DecisionValue value, CombiningOrder order);

struct DecideOptions {
  CombiningOrder order = CombiningOrder::DenyPermitIndeterminate;
};

Decision decide(const PolicyStore& store, const AccessRequest& req, DecideOptions options = {});

/// Human-readable trace, or exactly "access denied" for masked decisions.
std::string explain(const Decision& d);

inline constexpr std::string_view kMaskedExplanation = "access denied";

/// Status text carried in the wire response.
std::string_view status_message(DecisionValue value);

XacmlResponseDoc to_response(const Decision& d);

using DecideFn = std::function<Decision(const PolicyStore&, const AccessRequest&)>;

}  // namespace sac
