#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sac/ontology.hpp"
#include "sac/scalar.hpp"

namespace sac {

/// Purpose sentinel: the rule accepts any declared purpose.
inline constexpr std::string_view kAnyPurpose = "ANY";

enum class CompareOp {
  Equals,
  NotEquals,
  GreaterThan,
  GreaterThanOrEqual,
  LessThan,
  LessThanOrEqual,
  In,
};

std::string_view to_string(CompareOp op);
std::optional<CompareOp> parse_compare_op(std::string_view text);

struct ConditionExpr;

struct EmptyCondition {
  bool operator==(const EmptyCondition&) const = default;
};

struct Comparison {
  std::string attribute;
  CompareOp op = CompareOp::Equals;
  std::vector<Scalar> reference;  // exactly one value unless op == In

  bool operator==(const Comparison&) const = default;
};

struct AllOf {
  std::vector<ConditionExpr> terms;
  bool operator==(const AllOf& other) const;
};

struct AnyOf {
  std::vector<ConditionExpr> terms;
  bool operator==(const AnyOf& other) const;
};

/// And/or tree of typed comparisons over context attributes.
struct ConditionExpr {
  std::variant<EmptyCondition, Comparison, AllOf, AnyOf> node;

  static ConditionExpr empty() { return {}; }
  static ConditionExpr compare(std::string attribute, CompareOp op, Scalar reference);
  static ConditionExpr one_of(std::string attribute, std::vector<Scalar> values);
  static ConditionExpr all_of(std::vector<ConditionExpr> terms);
  static ConditionExpr any_of(std::vector<ConditionExpr> terms);

  bool is_empty() const { return std::holds_alternative<EmptyCondition>(node); }
  bool operator==(const ConditionExpr&) const = default;
};

inline bool AllOf::operator==(const AllOf& other) const { return terms == other.terms; }
inline bool AnyOf::operator==(const AnyOf& other) const { return terms == other.terms; }

/// Throws Error(InvalidDocument) when an And/Or is empty or an atom's
/// reference list does not fit its operator.
void check_condition(const ConditionExpr& expr);

enum class Truth { True, False, MissingAttribute };

std::string_view to_string(Truth t);

struct ConditionResult {
  Truth truth = Truth::True;
  std::string missing_attribute;  // set when truth == MissingAttribute

  bool operator==(const ConditionResult&) const = default;
};

/// Three-valued evaluation. And: False if any child False, else Missing if
/// any child Missing, else True. Or is the dual. Throws Error(TypeMismatch)
/// when an operator is applied to incompatible scalar kinds.
ConditionResult evaluate_condition(const ConditionExpr& expr, const Context& ctx);

/// Calls `visit` for every comparison atom in document order.
template <typename Fn>
void for_each_atom(const ConditionExpr& expr, Fn&& visit) {
  if (const auto* cmp = std::get_if<Comparison>(&expr.node)) {
    visit(*cmp);
  } else if (const auto* all = std::get_if<AllOf>(&expr.node)) {
    for (const auto& t : all->terms) for_each_atom(t, visit);
  } else if (const auto* any = std::get_if<AnyOf>(&expr.node)) {
    for (const auto& t : any->terms) for_each_atom(t, visit);
  }
}

std::string describe(const Comparison& atom);

/// Rooted tree of purpose ids.
class PurposeTree {
 public:
  /// `parents` maps every id to its parent; the root maps to nullopt.
  /// Throws DuplicateId / DanglingReference / CycleDetected / InvalidDocument.
  static PurposeTree build(const std::vector<std::pair<std::string, std::optional<std::string>>>& entries);

  const std::string& root() const noexcept { return root_; }
  bool contains(std::string_view id) const { return parent_.find(id) != parent_.end(); }
  const std::optional<std::string>& parent_of(std::string_view id) const;
  const std::map<std::string, std::optional<std::string>, std::less<>>& entries() const {
    return parent_;
  }

  bool operator==(const PurposeTree&) const = default;

 private:
  std::string root_;
  std::map<std::string, std::optional<std::string>, std::less<>> parent_;
};

/// True iff allowed is ANY, requested == allowed, or requested lies below
/// allowed. Throws Error(UnknownPurpose).
bool purpose_compliant(std::string_view requested, std::string_view allowed,
                       const PurposeTree& tree);

struct RightCategory {
  std::string id;
  std::string description;
  std::set<std::string> implied_actions;  // AO ids

  bool operator==(const RightCategory&) const = default;
};

using RightCatalog = std::map<std::string, RightCategory, std::less<>>;

enum class VariableSide { Subject, Object };

std::string_view to_string(VariableSide side);

struct AttributeVariable {
  std::string name;  // concept id in AtO
  VariableSide binds = VariableSide::Subject;

  bool operator==(const AttributeVariable&) const = default;
};

/// The (subject, object, action, purpose, condition, right) rule with its
/// required credentials.
struct AccessRule {
  std::string name;
  bool is_public = true;
  std::int64_t priority = 0;  // higher wins
  ConceptRef subject{OntologyKind::SO, std::string(kTopConcept)};
  std::vector<AttributeVariable> subject_vars;
  ConceptRef object{OntologyKind::OO, std::string(kTopConcept)};
  std::vector<AttributeVariable> object_vars;
  ConceptRef action{OntologyKind::AO, std::string(kTopConcept)};
  std::vector<AttributeDescriptor> required_attributes;
  std::string purpose{kAnyPurpose};
  ConditionExpr condition;
  std::string right;  // empty: no right category attached

  bool operator==(const AccessRule&) const = default;
};

struct Finding {
  ErrorCode code;
  std::string path;
  std::string message;

  bool operator==(const Finding&) const = default;
};

using ValidationReport = std::vector<Finding>;

std::string format_report(const ValidationReport& report);

/// Referential validation of one rule. `rule_path` prefixes every finding's
/// path (the rule's location inside its document).
ValidationReport validate_rule(const AccessRule& rule, const OntologySet& ontologies,
                               const PurposeTree& tree, const RightCatalog& rights,
                               const std::string& rule_path = "rule");

}  // namespace sac
