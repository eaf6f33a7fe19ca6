#include "sac/parser.hpp"

#include <set>

#include "sac/error.hpp"
#include "sac/xml.hpp"

namespace sac {

std::string_view to_string(DecisionValue value) {
  switch (value) {
    case DecisionValue::Permit: return "Permit";
    case DecisionValue::Deny: return "Deny";
    case DecisionValue::Indeterminate: return "Indeterminate";
    case DecisionValue::NotApplicable: return "NotApplicable";
  }
  return "Indeterminate";
}

std::optional<DecisionValue> parse_decision_value(std::string_view text) {
  for (auto v : {DecisionValue::Permit, DecisionValue::Deny, DecisionValue::Indeterminate,
                 DecisionValue::NotApplicable}) {
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

namespace {

using xml::Element;

[[noreturn]] void unknown_element(const Element& el, const Element& parent) {
  throw Error(ErrorCode::UnknownElement,
              "unexpected <" + el.name + "> inside <" + parent.name + ">", el.where);
}

void expect_root(const Element& root, std::string_view name) {
  if (root.name != name) {
    throw Error(ErrorCode::UnknownElement,
                "expected <" + std::string(name) + "> root, found <" + root.name + ">",
                root.where);
  }
}

bool parse_bool_attribute(const Element& el, std::string_view key, bool fallback) {
  const auto* v = el.find_attribute(key);
  if (!v) return fallback;
  if (*v == "true") return true;
  if (*v == "false") return false;
  throw Error(ErrorCode::InvalidDocument,
              "attribute '" + std::string(key) + "' must be true or false, found '" + *v + "'",
              el.where);
}

std::int64_t parse_priority(const Element& el, std::string_view key) {
  const auto* v = el.find_attribute(key);
  if (!v) return 0;
  Scalar s;
  try {
    s = parse_scalar(ScalarType::Int, *v);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidDocument, e.detail(), el.where);
  }
  const auto p = std::get<std::int64_t>(s);
  if (p < 0) {
    throw Error(ErrorCode::InvalidDocument, "priority must be >= 0", el.where);
  }
  return p;
}

Scalar parse_typed(const Element& el, ScalarType type, std::string_view text) {
  try {
    return parse_scalar(type, text);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidDocument, e.detail(), el.where);
  }
}

ScalarType parse_value_type(const Element& el) {
  const auto* t = el.find_attribute("valueType");
  if (!t) return ScalarType::String;
  auto type = parse_scalar_type(*t);
  if (!type) {
    throw Error(ErrorCode::InvalidDocument, "unknown valueType '" + *t + "'", el.where);
  }
  return *type;
}

// Elements that may appear at most once inside a rule body.
const Element* single_child(const Element& parent, std::string_view name,
                            std::set<std::string>& seen, const Element& el) {
  if (!seen.insert(std::string(name)).second) {
    throw Error(ErrorCode::InvalidDocument,
                "<" + std::string(name) + "> appears twice inside <" + parent.name + ">",
                el.where);
  }
  return &el;
}

ConceptRef parse_target_ref(const Element& el, OntologyKind expected) {
  ConceptRef ref{expected, el.required_attribute("name")};
  if (ref.id.empty()) {
    throw Error(ErrorCode::InvalidDocument, "<" + el.name + "> has an empty name", el.where);
  }
  if (const auto* tag = el.find_attribute("ontologyRef")) {
    auto kind = parse_ontology_kind(*tag);
    if (!kind) {
      throw Error(ErrorCode::UnknownOntologyRef, "unknown ontologyRef '" + *tag + "'",
                  el.where);
    }
    if (*kind != expected) {
      throw Error(ErrorCode::WrongOntologyTag,
                  "<" + el.name + "> must reference " + std::string(to_string(expected)) +
                      ", found " + *tag,
                  el.where);
    }
  }
  return ref;
}

AttributeVariable parse_variable(const Element& el) {
  AttributeVariable var;
  var.name = el.required_attribute("name");
  const auto& side = el.required_attribute("type");
  if (side == "subject") {
    var.binds = VariableSide::Subject;
  } else if (side == "object") {
    var.binds = VariableSide::Object;
  } else {
    throw Error(ErrorCode::InvalidDocument,
                "AttributeVariable type must be subject or object, found '" + side + "'",
                el.where);
  }
  (void)parse_target_ref(el, OntologyKind::AtO);
  return var;
}

void parse_target(const Element& target, AccessRule& rule) {
  std::set<std::string> seen;
  for (const auto& el : target.children) {
    if (el.name == "Subject") {
      single_child(target, el.name, seen, el);
      rule.subject = parse_target_ref(el, OntologyKind::SO);
    } else if (el.name == "Object") {
      single_child(target, el.name, seen, el);
      rule.object = parse_target_ref(el, OntologyKind::OO);
    } else if (el.name == "Action") {
      single_child(target, el.name, seen, el);
      rule.action = parse_target_ref(el, OntologyKind::AO);
    } else if (el.name == "AttributeVariable") {
      auto var = parse_variable(el);
      (var.binds == VariableSide::Subject ? rule.subject_vars : rule.object_vars)
          .push_back(std::move(var));
    } else {
      unknown_element(el, target);
    }
  }
}

ConditionExpr parse_condition(const Element& el) {
  const auto& type = el.required_attribute("type");
  if (type == "And" || type == "Or") {
    std::vector<ConditionExpr> terms;
    for (const auto& child : el.children) {
      if (child.name != "Condition") unknown_element(child, el);
      terms.push_back(parse_condition(child));
    }
    if (terms.empty()) {
      throw Error(ErrorCode::InvalidDocument, type + " condition has no operands", el.where);
    }
    return type == "And" ? ConditionExpr::all_of(std::move(terms))
                         : ConditionExpr::any_of(std::move(terms));
  }
  auto op = parse_compare_op(type);
  if (!op) {
    throw Error(ErrorCode::UnknownConditionType, "unknown condition type '" + type + "'",
                el.where);
  }
  Comparison atom;
  atom.attribute = el.required_attribute("attribute");
  atom.op = *op;
  const auto value_type = parse_value_type(el);
  if (*op == CompareOp::In) {
    for (const auto& child : el.children) {
      if (child.name != "Value") unknown_element(child, el);
      atom.reference.push_back(parse_typed(child, value_type, child.trimmed_text()));
    }
    if (atom.reference.empty()) {
      throw Error(ErrorCode::InvalidDocument, "In condition has no values", el.where);
    }
  } else {
    if (!el.children.empty()) unknown_element(el.children.front(), el);
    atom.reference.push_back(parse_typed(el, value_type, el.required_attribute("reference")));
  }
  if (atom.attribute.empty()) {
    throw Error(ErrorCode::InvalidDocument, "condition attribute is empty", el.where);
  }
  return {std::move(atom)};
}

AttributeDescriptor parse_spl_attribute(const Element& el) {
  AttributeDescriptor attr;
  if (const auto* id = el.find_attribute("attributeID")) attr.attribute_id = *id;
  if (const auto* e = el.find_attribute("e")) attr.equivalence_enabled = parse_equivalence_flag(*e);
  bool have_name = false;
  bool have_soa = false;
  for (const auto& child : el.children) {
    if (child.name == "spl:attribute_Name" && !have_name) {
      attr.name = child.trimmed_text();
      have_name = true;
    } else if (child.name == "spl:SOA_ID" && !have_soa) {
      attr.soa_id = child.trimmed_text();
      have_soa = true;
    } else {
      unknown_element(child, el);
    }
  }
  if (!have_name || attr.name.empty()) {
    throw Error(ErrorCode::InvalidDocument, "spl:attribute requires spl:attribute_Name",
                el.where);
  }
  if (!have_soa) {
    throw Error(ErrorCode::InvalidDocument, "spl:attribute requires spl:SOA_ID", el.where);
  }
  return attr;
}

// Shared body of <spl:access_Rule> and <rule>.
void parse_rule_body(const Element& el, AccessRule& rule) {
  std::set<std::string> seen;
  for (const auto& child : el.children) {
    if (child.name == "spl:attribute_Set") {
      single_child(el, child.name, seen, child);
      for (const auto& a : child.children) {
        if (a.name != "spl:attribute") unknown_element(a, child);
        rule.required_attributes.push_back(parse_spl_attribute(a));
      }
    } else if (child.name == "Target") {
      single_child(el, child.name, seen, child);
      parse_target(child, rule);
    } else if (child.name == "Right") {
      single_child(el, child.name, seen, child);
      rule.right = child.required_attribute("type");
    } else if (child.name == "Purpose") {
      single_child(el, child.name, seen, child);
      const auto& p = child.required_attribute("type");
      rule.purpose = (p == "n/a" || p == kAnyPurpose || p.empty()) ? std::string(kAnyPurpose) : p;
    } else if (child.name == "Condition") {
      single_child(el, child.name, seen, child);
      rule.condition = parse_condition(child);
    } else {
      unknown_element(child, el);
    }
  }
}

void check_rule_name(const std::string& name, const Element& el) {
  if (name.empty()) {
    throw Error(ErrorCode::InvalidDocument, "rule name must not be empty", el.where);
  }
}

// ---------------------------------------------------------------------------
// Serialization helpers

void write_ref(Element& target, const char* tag, const ConceptRef& ref) {
  if (ref.id == kTopConcept) return;
  target.add_child(tag).set("name", ref.id).set("ontologyRef", std::string(to_string(ref.ontology)));
}

void write_condition(Element& parent, const ConditionExpr& expr) {
  if (expr.is_empty()) return;
  auto& el = parent.add_child("Condition");
  if (const auto* cmp = std::get_if<Comparison>(&expr.node)) {
    el.set("type", std::string(to_string(cmp->op))).set("attribute", cmp->attribute);
    const auto type = cmp->reference.empty() ? ScalarType::String : type_of(cmp->reference.front());
    if (type != ScalarType::String) el.set("valueType", std::string(to_string(type)));
    if (cmp->op == CompareOp::In) {
      for (const auto& v : cmp->reference) el.add_child("Value").text = format_scalar(v);
    } else {
      el.set("reference", format_scalar(cmp->reference.at(0)));
    }
    return;
  }
  const bool all = std::holds_alternative<AllOf>(expr.node);
  el.set("type", all ? "And" : "Or");
  const auto& terms = all ? std::get<AllOf>(expr.node).terms : std::get<AnyOf>(expr.node).terms;
  for (const auto& t : terms) write_condition(el, t);
}

void write_rule_body(Element& el, const AccessRule& rule) {
  if (!rule.required_attributes.empty()) {
    auto& set = el.add_child("spl:attribute_Set");
    for (const auto& a : rule.required_attributes) {
      auto& attr = set.add_child("spl:attribute");
      attr.set("attributeID", a.attribute_id);
      attr.set("e", a.equivalence_enabled ? "Enabled" : "Disabled");
      attr.add_child("spl:attribute_Name").text = a.name;
      attr.add_child("spl:SOA_ID").text = a.soa_id;
    }
  }
  Element target;
  target.name = "Target";
  write_ref(target, "Subject", rule.subject);
  for (const auto& v : rule.subject_vars) {
    target.add_child("AttributeVariable").set("name", v.name).set("type", "subject").set("ontologyRef", "AtO");
  }
  write_ref(target, "Object", rule.object);
  for (const auto& v : rule.object_vars) {
    target.add_child("AttributeVariable").set("name", v.name).set("type", "object").set("ontologyRef", "AtO");
  }
  write_ref(target, "Action", rule.action);
  if (!target.children.empty()) el.children.push_back(std::move(target));
  if (!rule.right.empty()) el.add_child("Right").set("type", rule.right);
  if (rule.purpose != kAnyPurpose) el.add_child("Purpose").set("type", rule.purpose);
  write_condition(el, rule.condition);
}

AttributeDescriptor parse_wire_attribute(const Element& el) {
  AttributeDescriptor a;
  a.attribute_id = el.required_attribute("attributeID");
  if (const auto* n = el.find_attribute("name")) a.name = *n;
  if (const auto* s = el.find_attribute("soa")) a.soa_id = *s;
  if (const auto* e = el.find_attribute("e")) a.equivalence_enabled = parse_equivalence_flag(*e);
  if (const auto* v = el.find_attribute("value")) {
    a.value = parse_typed(el, parse_value_type(el), *v);
  }
  return a;
}

void write_wire_attribute(Element& parent, const AttributeDescriptor& a) {
  auto& el = parent.add_child("Attribute");
  el.set("attributeID", a.attribute_id);
  if (!a.name.empty()) el.set("name", a.name);
  if (!a.soa_id.empty()) el.set("soa", a.soa_id);
  if (a.equivalence_enabled) el.set("e", "Enabled");
  if (a.value) {
    el.set("valueType", std::string(to_string(type_of(*a.value))));
    el.set("value", format_scalar(*a.value));
  }
}

void parse_entity(const Element& el, std::string& id, std::vector<std::string>& concepts,
                  std::vector<AttributeDescriptor>& attributes) {
  id = el.required_attribute("id");
  for (const auto& child : el.children) {
    if (child.name == "Concept") {
      concepts.push_back(child.required_attribute("id"));
    } else if (child.name == "Attribute") {
      attributes.push_back(parse_wire_attribute(child));
    } else {
      unknown_element(child, el);
    }
  }
}

void write_entity(Element& parent, const char* tag, const std::string& id,
                  const std::vector<std::string>& concepts,
                  const std::vector<AttributeDescriptor>& attributes) {
  auto& el = parent.add_child(tag);
  el.set("id", id);
  for (const auto& c : concepts) el.add_child("Concept").set("id", c);
  for (const auto& a : attributes) write_wire_attribute(el, a);
}

}  // namespace

// ---------------------------------------------------------------------------
// SPL policies and rules

PolicyDocument parse_spl_policy(std::string_view text) {
  const auto root = xml::parse(text);
  expect_root(root, "spl:policy");
  PolicyDocument doc;
  if (const auto* n = root.find_attribute("name")) doc.source_name = *n;
  if (const auto* v = root.find_attribute("version")) doc.format_version = *v;

  std::set<std::string> seen;
  for (const auto& section : root.children) {
    if (section.name == "spl:rights") {
      single_child(root, section.name, seen, section);
      for (const auto& r : section.children) {
        if (r.name != "spl:right") unknown_element(r, section);
        RightCategory right;
        right.id = r.required_attribute("id");
        if (const auto* d = r.find_attribute("description")) right.description = *d;
        for (const auto& imp : r.children) {
          if (imp.name != "spl:implies") unknown_element(imp, r);
          right.implied_actions.insert(imp.required_attribute("action"));
        }
        const auto id = right.id;
        if (!doc.rights.emplace(id, std::move(right)).second) {
          throw Error(ErrorCode::DuplicateId, "right '" + id + "' declared twice", r.where);
        }
      }
    } else if (section.name == "spl:access_Rules") {
      single_child(root, section.name, seen, section);
      std::set<std::string> names;
      for (const auto& el : section.children) {
        if (el.name != "spl:access_Rule") unknown_element(el, section);
        AccessRule rule;
        rule.name = el.required_attribute("Name");
        check_rule_name(rule.name, el);
        rule.is_public = parse_bool_attribute(el, "Public", true);
        rule.priority = parse_priority(el, "Priority");
        parse_rule_body(el, rule);
        if (!names.insert(rule.name).second) {
          throw Error(ErrorCode::DuplicateRuleName, "rule '" + rule.name + "' appears twice",
                      el.where);
        }
        doc.rules.push_back(std::move(rule));
      }
    } else {
      unknown_element(section, root);
    }
  }
  return doc;
}

std::string serialize_policy(const PolicyDocument& doc) {
  Element root;
  root.name = "spl:policy";
  if (!doc.source_name.empty()) root.set("name", doc.source_name);
  root.set("version", doc.format_version);
  if (!doc.rights.empty()) {
    auto& rights = root.add_child("spl:rights");
    for (const auto& [id, r] : doc.rights) {
      auto& el = rights.add_child("spl:right");
      el.set("id", id);
      if (!r.description.empty()) el.set("description", r.description);
      for (const auto& a : r.implied_actions) el.add_child("spl:implies").set("action", a);
    }
  }
  auto& rules = root.add_child("spl:access_Rules");
  for (const auto& rule : doc.rules) {
    auto& el = rules.add_child("spl:access_Rule");
    el.set("Name", rule.name);
    el.set("Public", rule.is_public ? "true" : "false");
    el.set("Priority", std::to_string(rule.priority));
    write_rule_body(el, rule);
  }
  return xml::to_canonical(root);
}

AccessRule parse_rule(std::string_view text) {
  const auto root = xml::parse(text);
  expect_root(root, "rule");
  AccessRule rule;
  rule.name = "rule";
  if (const auto* n = root.find_attribute("name")) rule.name = *n;
  check_rule_name(rule.name, root);
  rule.is_public = parse_bool_attribute(root, "public", true);
  rule.priority = parse_priority(root, "priority");
  parse_rule_body(root, rule);
  return rule;
}

std::string serialize_rule(const AccessRule& rule) {
  Element root;
  root.name = "rule";
  root.set("name", rule.name);
  root.set("public", rule.is_public ? "true" : "false");
  root.set("priority", std::to_string(rule.priority));
  write_rule_body(root, rule);
  return xml::to_canonical(root);
}

// ---------------------------------------------------------------------------
// Purpose trees

PurposeTree parse_purpose_tree(std::string_view text) {
  const auto root = xml::parse(text);
  expect_root(root, "purposes");
  std::vector<std::pair<std::string, std::optional<std::string>>> entries;
  for (const auto& el : root.children) {
    if (el.name != "purpose") unknown_element(el, root);
    std::optional<std::string> parent;
    if (const auto* p = el.find_attribute("parent")) parent = *p;
    entries.emplace_back(el.required_attribute("id"), parent);
  }
  try {
    return PurposeTree::build(entries);
  } catch (const Error& e) {
    throw Error(e.code(), e.detail(), root.where);
  }
}

std::string serialize_purpose_tree(const PurposeTree& tree) {
  Element root;
  root.name = "purposes";
  for (const auto& [id, parent] : tree.entries()) {
    auto& el = root.add_child("purpose");
    el.set("id", id);
    if (parent) el.set("parent", *parent);
  }
  return xml::to_canonical(root);
}

// ---------------------------------------------------------------------------
// XACML request/response subset

XacmlRequestDoc parse_xacml_request(std::string_view text) {
  const auto root = xml::parse(text);
  expect_root(root, "Request");
  XacmlRequestDoc req;
  std::set<std::string> seen;
  for (const auto& el : root.children) {
    if (el.name == "Subject") {
      single_child(root, el.name, seen, el);
      parse_entity(el, req.subject_id, req.subject_concepts, req.subject_attributes);
    } else if (el.name == "Resource") {
      single_child(root, el.name, seen, el);
      parse_entity(el, req.resource_id, req.resource_concepts, req.resource_attributes);
    } else if (el.name == "Action") {
      single_child(root, el.name, seen, el);
      if (!el.children.empty()) unknown_element(el.children.front(), el);
      req.action_id = el.required_attribute("id");
      req.purpose = el.required_attribute("purpose");
    } else if (el.name == "Environment") {
      single_child(root, el.name, seen, el);
      for (const auto& a : el.children) {
        if (a.name != "Attribute") unknown_element(a, el);
        auto attr = parse_wire_attribute(a);
        if (!attr.value) {
          throw Error(ErrorCode::InvalidDocument,
                      "environment attribute '" + attr.attribute_id + "' has no value", a.where);
        }
        req.environment.insert_or_assign(attr.attribute_id, *attr.value);
      }
    } else {
      unknown_element(el, root);
    }
  }
  for (const char* category : {"Subject", "Resource", "Action", "Environment"}) {
    if (!seen.count(category)) {
      throw Error(ErrorCode::MissingCategory,
                  std::string("request has no <") + category + "> category", root.where);
    }
  }
  return req;
}

std::string serialize_xacml_request(const XacmlRequestDoc& req) {
  Element root;
  root.name = "Request";
  write_entity(root, "Subject", req.subject_id, req.subject_concepts, req.subject_attributes);
  write_entity(root, "Resource", req.resource_id, req.resource_concepts, req.resource_attributes);
  root.add_child("Action").set("id", req.action_id).set("purpose", req.purpose);
  auto& env = root.add_child("Environment");
  for (const auto& [id, value] : req.environment) {
    write_wire_attribute(env, AttributeDescriptor{id, {}, {}, false, value});
  }
  return xml::to_canonical(root);
}

XacmlResponseDoc parse_xacml_response(std::string_view text) {
  const auto root = xml::parse(text);
  expect_root(root, "Response");
  if (root.children.size() != 1 || root.children.front().name != "Result") {
    throw Error(ErrorCode::InvalidDocument, "response needs exactly one <Result>", root.where);
  }
  const auto& result = root.children.front();
  XacmlResponseDoc resp;
  bool have_decision = false;
  for (const auto& el : result.children) {
    if (el.name == "Decision" && !have_decision) {
      auto v = parse_decision_value(el.trimmed_text());
      if (!v) {
        throw Error(ErrorCode::InvalidDocument, "unknown decision '" + el.trimmed_text() + "'",
                    el.where);
      }
      resp.decision = *v;
      have_decision = true;
    } else if (el.name == "Status") {
      resp.status = el.trimmed_text();
    } else if (el.name == "Right") {
      resp.granted_right = el.required_attribute("id");
    } else if (el.name == "Trace") {
      resp.trace_rule = el.required_attribute("rule");
      for (const auto& entry : el.children) {
        if (entry.name != "Entry") unknown_element(entry, el);
        resp.trace.push_back(entry.text);
      }
    } else {
      unknown_element(el, result);
    }
  }
  if (!have_decision) {
    throw Error(ErrorCode::InvalidDocument, "response has no <Decision>", result.where);
  }
  return resp;
}

std::string serialize_xacml_response(const XacmlResponseDoc& resp) {
  Element root;
  root.name = "Response";
  auto& result = root.add_child("Result");
  result.add_child("Decision").text = std::string(to_string(resp.decision));
  result.add_child("Status").text = resp.status;
  if (resp.granted_right) result.add_child("Right").set("id", *resp.granted_right);
  if (resp.trace_rule) {
    auto& trace = result.add_child("Trace");
    trace.set("rule", *resp.trace_rule);
    for (const auto& entry : resp.trace) trace.add_child("Entry").text = entry;
  }
  return xml::to_canonical(root);
}

}  // namespace sac
