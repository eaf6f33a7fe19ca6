#include "sac/policy.hpp"

#include <algorithm>

#include "sac/error.hpp"

namespace sac {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Equals: return "Equals";
    case CompareOp::NotEquals: return "NotEquals";
    case CompareOp::GreaterThan: return "GreaterThan";
    case CompareOp::GreaterThanOrEqual: return "GreaterThanOrEqual";
    case CompareOp::LessThan: return "LessThan";
    case CompareOp::LessThanOrEqual: return "LessThanOrEqual";
    case CompareOp::In: return "In";
  }
  return "Equals";
}

std::optional<CompareOp> parse_compare_op(std::string_view text) {
  for (auto op : {CompareOp::Equals, CompareOp::NotEquals, CompareOp::GreaterThan,
                  CompareOp::GreaterThanOrEqual, CompareOp::LessThan,
                  CompareOp::LessThanOrEqual, CompareOp::In}) {
    if (to_string(op) == text) return op;
  }
  return std::nullopt;
}

std::string_view to_string(Truth t) {
  switch (t) {
    case Truth::True: return "True";
    case Truth::False: return "False";
    case Truth::MissingAttribute: return "MissingAttribute";
  }
  return "False";
}

std::string_view to_string(VariableSide side) {
  return side == VariableSide::Subject ? "subject" : "object";
}

ConditionExpr ConditionExpr::compare(std::string attribute, CompareOp op, Scalar reference) {
  return {Comparison{std::move(attribute), op, {std::move(reference)}}};
}

ConditionExpr ConditionExpr::one_of(std::string attribute, std::vector<Scalar> values) {
  return {Comparison{std::move(attribute), CompareOp::In, std::move(values)}};
}

ConditionExpr ConditionExpr::all_of(std::vector<ConditionExpr> terms) {
  return {AllOf{std::move(terms)}};
}

ConditionExpr ConditionExpr::any_of(std::vector<ConditionExpr> terms) {
  return {AnyOf{std::move(terms)}};
}

void check_condition(const ConditionExpr& expr) {
  if (const auto* cmp = std::get_if<Comparison>(&expr.node)) {
    if (cmp->attribute.empty()) {
      throw Error(ErrorCode::InvalidDocument, "condition atom has no attribute");
    }
    if (cmp->op == CompareOp::In ? cmp->reference.empty() : cmp->reference.size() != 1) {
      throw Error(ErrorCode::InvalidDocument,
                  "condition on '" + cmp->attribute + "' has a bad reference list");
    }
  } else if (const auto* all = std::get_if<AllOf>(&expr.node)) {
    if (all->terms.empty()) throw Error(ErrorCode::InvalidDocument, "empty And condition");
    for (const auto& t : all->terms) check_condition(t);
  } else if (const auto* any = std::get_if<AnyOf>(&expr.node)) {
    if (any->terms.empty()) throw Error(ErrorCode::InvalidDocument, "empty Or condition");
    for (const auto& t : any->terms) check_condition(t);
  }
}

namespace {

long double as_number(const Scalar& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<long double>(*i);
  return static_cast<long double>(std::get<double>(v));
}

[[noreturn]] void mismatch(const Comparison& atom, const Scalar& actual, const Scalar& ref) {
  throw Error(ErrorCode::TypeMismatch,
              std::string(to_string(atom.op)) + " on '" + atom.attribute + "' compares " +
                  std::string(to_string(type_of(actual))) + " with " +
                  std::string(to_string(type_of(ref))));
}

bool scalar_equals(const Comparison& atom, const Scalar& actual, const Scalar& ref) {
  if (is_numeric(actual) && is_numeric(ref)) {
    if (std::holds_alternative<std::int64_t>(actual) &&
        std::holds_alternative<std::int64_t>(ref)) {
      return std::get<std::int64_t>(actual) == std::get<std::int64_t>(ref);
    }
    return as_number(actual) == as_number(ref);
  }
  if (actual.index() != ref.index()) mismatch(atom, actual, ref);
  return actual == ref;
}

bool compare_atom(const Comparison& atom, const Scalar& actual) {
  switch (atom.op) {
    case CompareOp::Equals:
      return scalar_equals(atom, actual, atom.reference.at(0));
    case CompareOp::NotEquals:
      return !scalar_equals(atom, actual, atom.reference.at(0));
    case CompareOp::In: {
      bool found = false;
      for (const auto& ref : atom.reference) {
        // every entry is type-checked, so the result never depends on order
        if (scalar_equals(atom, actual, ref)) found = true;
      }
      return found;
    }
    default:
      break;
  }
  const auto& ref = atom.reference.at(0);
  if (!is_numeric(actual) || !is_numeric(ref)) mismatch(atom, actual, ref);
  if (std::holds_alternative<std::int64_t>(actual) &&
      std::holds_alternative<std::int64_t>(ref)) {
    const auto a = std::get<std::int64_t>(actual);
    const auto r = std::get<std::int64_t>(ref);
    switch (atom.op) {
      case CompareOp::GreaterThan: return a > r;
      case CompareOp::GreaterThanOrEqual: return a >= r;
      case CompareOp::LessThan: return a < r;
      default: return a <= r;
    }
  }
  const auto a = as_number(actual);
  const auto r = as_number(ref);
  switch (atom.op) {
    case CompareOp::GreaterThan: return a > r;
    case CompareOp::GreaterThanOrEqual: return a >= r;
    case CompareOp::LessThan: return a < r;
    default: return a <= r;
  }
}

}  // namespace

ConditionResult evaluate_condition(const ConditionExpr& expr, const Context& ctx) {
  if (std::holds_alternative<EmptyCondition>(expr.node)) return {Truth::True, {}};

  if (const auto* cmp = std::get_if<Comparison>(&expr.node)) {
    auto it = ctx.find(cmp->attribute);
    if (it == ctx.end()) return {Truth::MissingAttribute, cmp->attribute};
    return {compare_atom(*cmp, it->second) ? Truth::True : Truth::False, {}};
  }

  const bool conjunction = std::holds_alternative<AllOf>(expr.node);
  const auto& terms = conjunction ? std::get<AllOf>(expr.node).terms
                                  : std::get<AnyOf>(expr.node).terms;
  // The absorbing value wins outright; otherwise a missing attribute makes
  // the whole term undetermined.
  const Truth absorbing = conjunction ? Truth::False : Truth::True;
  bool absorbed = false;
  std::optional<ConditionResult> missing;
  for (const auto& term : terms) {
    auto r = evaluate_condition(term, ctx);
    if (r.truth == absorbing) absorbed = true;
    if (r.truth == Truth::MissingAttribute && !missing) missing = r;
  }
  if (absorbed) return {absorbing, {}};
  if (missing) return *missing;
  return {conjunction ? Truth::True : Truth::False, {}};
}

std::string describe(const Comparison& atom) {
  std::string out = atom.attribute + " " + std::string(to_string(atom.op)) + " ";
  if (atom.op == CompareOp::In) out += "{";
  for (std::size_t i = 0; i < atom.reference.size(); ++i) {
    if (i) out += ", ";
    const auto& v = atom.reference[i];
    if (std::holds_alternative<std::string>(v)) {
      out += "\"" + format_scalar(v) + "\"";
    } else {
      out += format_scalar(v);
    }
  }
  if (atom.op == CompareOp::In) out += "}";
  return out;
}

// ---------------------------------------------------------------------------
// Purposes

PurposeTree PurposeTree::build(
    const std::vector<std::pair<std::string, std::optional<std::string>>>& entries) {
  PurposeTree tree;
  for (const auto& [id, parent] : entries) {
    if (id.empty()) throw Error(ErrorCode::InvalidDocument, "purpose id must not be empty");
    if (id == kAnyPurpose) {
      throw Error(ErrorCode::DuplicateId, "'ANY' is reserved and cannot be declared");
    }
    if (!tree.parent_.emplace(id, parent).second) {
      throw Error(ErrorCode::DuplicateId, "purpose '" + id + "' declared twice");
    }
  }
  std::vector<std::string> roots;
  for (const auto& [id, parent] : tree.parent_) {
    if (!parent) {
      roots.push_back(id);
    } else if (!tree.contains(*parent)) {
      throw Error(ErrorCode::DanglingReference,
                  "purpose '" + id + "' has undeclared parent '" + *parent + "'");
    }
  }
  if (roots.size() != 1) {
    throw Error(ErrorCode::InvalidDocument,
                "purpose tree needs exactly one root, found " + std::to_string(roots.size()));
  }
  tree.root_ = roots.front();
  // With one parent each, any node that cannot reach the root sits on a cycle.
  for (const auto& [id, parent] : tree.parent_) {
    std::string cur = id;
    for (std::size_t steps = 0;; ++steps) {
      const auto& p = tree.parent_.find(cur)->second;
      if (!p) break;
      if (steps > tree.parent_.size()) {
        throw Error(ErrorCode::CycleDetected, "purpose '" + id + "' is on a parent cycle");
      }
      cur = *p;
    }
  }
  return tree;
}

const std::optional<std::string>& PurposeTree::parent_of(std::string_view id) const {
  auto it = parent_.find(id);
  if (it == parent_.end()) {
    throw Error(ErrorCode::UnknownPurpose, "unknown purpose '" + std::string(id) + "'");
  }
  return it->second;
}

bool purpose_compliant(std::string_view requested, std::string_view allowed,
                       const PurposeTree& tree) {
  if (!tree.contains(requested)) {
    throw Error(ErrorCode::UnknownPurpose, "unknown purpose '" + std::string(requested) + "'");
  }
  if (allowed == kAnyPurpose) return true;
  if (!tree.contains(allowed)) {
    throw Error(ErrorCode::UnknownPurpose, "unknown purpose '" + std::string(allowed) + "'");
  }
  std::optional<std::string> cur{std::string(requested)};
  while (cur) {
    if (*cur == allowed) return true;
    cur = tree.parent_of(*cur);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Validation

std::string format_report(const ValidationReport& report) {
  std::string out;
  for (const auto& f : report) {
    out += std::string(to_string(f.code)) + " " + f.path + ": " + f.message + "\n";
  }
  return out;
}

ValidationReport validate_rule(const AccessRule& rule, const OntologySet& ontologies,
                               const PurposeTree& tree, const RightCatalog& rights,
                               const std::string& rule_path) {
  ValidationReport report;
  auto check_ref = [&](const ConceptRef& ref, OntologyKind expected, const std::string& path) {
    if (ref.ontology != expected) {
      report.push_back({ErrorCode::WrongOntologyTag, path,
                        "expected ontology " + std::string(to_string(expected)) + ", found " +
                            std::string(to_string(ref.ontology))});
      return;
    }
    if (!ontologies.get(expected).contains(ref.id)) {
      report.push_back({ErrorCode::DanglingReference, path,
                        "'" + ref.id + "' is not in " + std::string(to_string(expected))});
    }
  };
  const std::string target = rule_path + "/Target";
  check_ref(rule.subject, OntologyKind::SO, target + "/Subject[@name='" + rule.subject.id + "']");
  check_ref(rule.object, OntologyKind::OO, target + "/Object[@name='" + rule.object.id + "']");
  check_ref(rule.action, OntologyKind::AO, target + "/Action[@name='" + rule.action.id + "']");

  const auto& ato = ontologies.get(OntologyKind::AtO);
  for (const auto* vars : {&rule.subject_vars, &rule.object_vars}) {
    for (const auto& v : *vars) {
      if (!ato.contains(v.name)) {
        report.push_back({ErrorCode::DanglingReference,
                          target + "/AttributeVariable[@name='" + v.name + "']",
                          "'" + v.name + "' is not in AtO"});
      }
    }
  }
  for (const auto& a : rule.required_attributes) {
    if (!ato.contains(a.name)) {
      report.push_back({ErrorCode::DanglingReference,
                        rule_path + "/spl:attribute_Set/spl:attribute[@attributeID='" +
                            a.attribute_id + "']/spl:attribute_Name",
                        "'" + a.name + "' is not in AtO"});
    }
  }
  if (rule.purpose != kAnyPurpose && !tree.contains(rule.purpose)) {
    report.push_back({ErrorCode::UnknownPurpose,
                      rule_path + "/Purpose[@type='" + rule.purpose + "']",
                      "'" + rule.purpose + "' is not in the purpose tree"});
  }
  if (!rule.right.empty() && rights.find(rule.right) == rights.end()) {
    report.push_back({ErrorCode::DanglingReference,
                      rule_path + "/Right[@type='" + rule.right + "']",
                      "right category '" + rule.right + "' is not defined"});
  }
  try {
    check_condition(rule.condition);
  } catch (const Error& e) {
    report.push_back({e.code(), rule_path + "/Condition", e.detail()});
  }
  return report;
}

}  // namespace sac
