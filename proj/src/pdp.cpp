#include "sac/pdp.hpp"

#include <algorithm>

namespace sac {

ValidationError::ValidationError(ValidationReport report)
    : Error(ErrorCode::ValidationFailed,
            std::to_string(report.size()) + " validation finding(s)\n" + format_report(report)),
      report_(std::move(report)) {}

ValidationReport PolicyStore::validate(const PolicyDocument& policy,
                                       const OntologySet& ontologies,
                                       const PurposeTree& purposes) {
  ValidationReport report;
  const auto& ao = ontologies.get(OntologyKind::AO);
  for (const auto& [id, right] : policy.rights) {
    for (const auto& action : right.implied_actions) {
      if (!ao.contains(action)) {
        report.push_back({ErrorCode::DanglingReference,
                          "spl:policy/spl:rights/spl:right[@id='" + id + "']/spl:implies[@action='" +
                              action + "']",
                          "'" + action + "' is not in AO"});
      }
    }
  }
  std::set<std::string> names;
  for (const auto& rule : policy.rules) {
    const auto path = "spl:policy/spl:access_Rules/spl:access_Rule[@Name='" + rule.name + "']";
    if (!names.insert(rule.name).second) {
      report.push_back({ErrorCode::DuplicateRuleName, path, "rule name is not unique"});
    }
    for (auto& f : validate_rule(rule, ontologies, purposes, policy.rights, path)) {
      report.push_back(std::move(f));
    }
  }
  return report;
}

PolicyStore PolicyStore::activate(PolicyDocument policy, OntologySet ontologies,
                                  PurposeTree purposes, std::set<std::string> trusted_soas,
                                  std::uint64_t version) {
  if (!ontologies.complete()) {
    throw Error(ErrorCode::ConfigError, "all four ontologies are required");
  }
  auto report = validate(policy, ontologies, purposes);
  if (!report.empty()) throw ValidationError(std::move(report));
  PolicyStore store;
  store.policy_ = std::move(policy);
  store.ontologies_ = std::move(ontologies);
  store.purposes_ = std::move(purposes);
  store.trusted_ = std::move(trusted_soas);
  store.version_ = version;
  return store;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

void note(Trace* trace, std::string line) {
  if (trace) trace->push_back(std::move(line));
}

void require_known(const OntologyGraph& g, const std::set<std::string>& ids) {
  for (const auto& id : ids) {
    if (!g.contains(id)) {
      throw Error(ErrorCode::UnknownConcept,
                  "'" + id + "' is not a concept of " + std::string(to_string(g.kind())));
    }
  }
}

bool attribute_usable(const AttributeDescriptor& a, const OntologyGraph& ato,
                      const PolicyStore& store) {
  return store.trusts(a.soa_id) && !a.name.empty() && ato.contains(a.name);
}

bool bind_variable(const AttributeVariable& var, const std::vector<AttributeDescriptor>& presented,
                   const OntologyGraph& ato, const PolicyStore& store, Trace* trace) {
  for (const auto& a : presented) {
    if (attribute_usable(a, ato, store) && ato.subsumes(var.name, a.name)) {
      note(trace, std::string(to_string(var.binds)) + " variable " + var.name + " bound by " +
                      a.name + " (" + a.soa_id + ")");
      return true;
    }
  }
  note(trace, std::string(to_string(var.binds)) + " variable " + var.name + " unbound");
  return false;
}

}  // namespace

bool match_target(const AccessRule& rule, const AccessRequest& req, const PolicyStore& store,
                  Trace* trace) {
  const auto& so = store.graph(OntologyKind::SO);
  const auto& oo = store.graph(OntologyKind::OO);
  const auto& ao = store.graph(OntologyKind::AO);
  const auto& ato = store.graph(OntologyKind::AtO);

  // (a) subject, expanded through role inheritance
  require_known(so, req.subject_concepts);
  bool subject_ok = false;
  for (const auto& held : req.subject_concepts) {
    for (const auto& role : so.inherited_rights_roles(held)) {
      if (so.subsumes(rule.subject.id, role)) {
        std::string line = "subject " + held;
        if (role != held) line += " inherits " + role;
        line += ": " + join(so.isa_path(rule.subject.id, role), " is-a ");
        note(trace, line);
        subject_ok = true;
        break;
      }
    }
    if (subject_ok) break;
  }
  if (!subject_ok) {
    note(trace, "subject not subsumed by " + rule.subject.id);
    return false;
  }

  // (b) object
  require_known(oo, req.object_concepts);
  bool object_ok = false;
  for (const auto& obj : req.object_concepts) {
    if (oo.subsumes(rule.object.id, obj)) {
      note(trace, "object " + obj + ": " + join(oo.isa_path(rule.object.id, obj), " is-a "));
      object_ok = true;
      break;
    }
  }
  if (!object_ok) {
    note(trace, "object not subsumed by " + rule.object.id);
    return false;
  }

  // (c) action
  if (!ao.subsumes(rule.action.id, req.action)) {
    note(trace, "action " + req.action + " not subsumed by " + rule.action.id);
    return false;
  }
  note(trace, "action " + req.action + ": " + join(ao.isa_path(rule.action.id, req.action), " is-a "));

  // (d) required credentials, widened by attribute equivalence
  for (const auto& required : rule.required_attributes) {
    const auto accepted = equivalent_attributes(ato, required);
    bool found = false;
    for (const auto& a : req.subject_attributes) {
      if (store.trusts(a.soa_id) && accepted.count(a.name)) {
        note(trace, "required attribute " + required.name + " satisfied by " + a.name + " (" +
                        a.soa_id + ")");
        found = true;
        break;
      }
    }
    if (!found) {
      note(trace, "required attribute " + required.name + " not presented by a trusted issuer");
      return false;
    }
  }

  // (e) attribute variables
  for (const auto& var : rule.subject_vars) {
    if (!bind_variable(var, req.subject_attributes, ato, store, trace)) return false;
  }
  for (const auto& var : rule.object_vars) {
    if (!bind_variable(var, req.object_attributes, ato, store, trace)) return false;
  }
  return true;
}

DecisionValue evaluate_rule(const AccessRule& rule, const AccessRequest& req,
                            const PolicyStore& store, Trace* trace) {
  try {
    if (!match_target(rule, req, store, trace)) return DecisionValue::NotApplicable;
  } catch (const Error& e) {
    note(trace, std::string("target evaluation failed: ") + e.what());
    return DecisionValue::Indeterminate;
  }

  bool purpose_ok = false;
  try {
    purpose_ok = purpose_compliant(req.purpose, rule.purpose, store.purposes());
    note(trace, "purpose " + req.purpose + (purpose_ok ? " complies with " : " does not comply with ") +
                    rule.purpose);
  } catch (const Error& e) {
    note(trace, std::string("purpose check failed: ") + e.what());
    return DecisionValue::Indeterminate;
  }

  if (trace) {
    for_each_atom(rule.condition, [&](const Comparison& atom) {
      std::string result;
      try {
        result = std::string(to_string(evaluate_condition({atom}, req.context).truth));
      } catch (const Error& e) {
        result = std::string(to_string(e.code()));
      }
      trace->push_back("condition " + describe(atom) + ": " + result);
    });
  }
  ConditionResult cond;
  try {
    cond = evaluate_condition(rule.condition, req.context);
  } catch (const Error& e) {
    note(trace, std::string("condition failed: ") + e.what());
    return DecisionValue::Indeterminate;
  }
  if (cond.truth == Truth::MissingAttribute) {
    note(trace, "condition needs missing attribute " + cond.missing_attribute);
    return DecisionValue::Indeterminate;
  }
  if (rule.condition.is_empty()) note(trace, "condition empty: applies unconditionally");
  return purpose_ok && cond.truth == Truth::True ? DecisionValue::Permit : DecisionValue::Deny;
}

// ---------------------------------------------------------------------------
// Combining

int precedence(DecisionValue value, CombiningOrder order) {
  // Only this table differs between orders.
  switch (order) {
    case CombiningOrder::DenyPermitIndeterminate:
      switch (value) {
        case DecisionValue::Deny: return 3;
        case DecisionValue::Permit: return 2;
        case DecisionValue::Indeterminate: return 1;
        default: return 0;
      }
    case CombiningOrder::PermitDenyIndeterminate:
      switch (value) {
        case DecisionValue::Permit: return 3;
        case DecisionValue::Deny: return 2;
        case DecisionValue::Indeterminate: return 1;
        default: return 0;
      }
    case CombiningOrder::DenyIndeterminatePermit:
      switch (value) {
        case DecisionValue::Deny: return 3;
        case DecisionValue::Indeterminate: return 2;
        case DecisionValue::Permit: return 1;
        default: return 0;
      }
  }
  return 0;
}

Decision decide(const PolicyStore& store, const AccessRequest& req, DecideOptions options) {
  struct Outcome {
    const AccessRule* rule;
    DecisionValue value;
    Trace trace;
  };
  std::vector<Outcome> applicable;
  const auto& rules = store.policy().rules;
  for (const auto& rule : rules) {
    Trace trace;
    auto value = evaluate_rule(rule, req, store, &trace);
    if (value != DecisionValue::NotApplicable) {
      applicable.push_back({&rule, value, std::move(trace)});
    }
  }

  Decision d;
  d.store_version = store.version();
  const std::string version_line = "store version " + std::to_string(store.version());
  if (applicable.empty()) {
    d.value = DecisionValue::NotApplicable;
    d.explanation = {version_line, "no rule matched (0 of " + std::to_string(rules.size()) +
                                       " rules applicable)"};
    return d;
  }

  std::int64_t top = applicable.front().rule->priority;
  for (const auto& o : applicable) top = std::max(top, o.rule->priority);
  const Outcome* chosen = nullptr;
  for (const auto& o : applicable) {
    if (o.rule->priority != top) continue;
    if (!chosen || precedence(o.value, options.order) > precedence(chosen->value, options.order)) {
      chosen = &o;
    }
  }

  d.value = chosen->value;
  d.masked = !chosen->rule->is_public && d.value != DecisionValue::Permit;
  if (d.value == DecisionValue::Permit && !chosen->rule->right.empty()) {
    d.granted_right = chosen->rule->right;
  }
  if (d.masked) return d;

  d.matched_rule = chosen->rule->name;
  d.explanation.push_back(version_line);
  d.explanation.push_back("rule " + chosen->rule->name + " (priority " +
                          std::to_string(chosen->rule->priority) + ") decided " +
                          std::string(to_string(d.value)));
  for (const auto& line : chosen->trace) d.explanation.push_back(line);
  d.explanation.push_back(std::to_string(applicable.size()) + " of " +
                          std::to_string(rules.size()) + " rules applicable");
  return d;
}

std::string explain(const Decision& d) {
  if (d.masked) return std::string(kMaskedExplanation);
  std::string out;
  for (const auto& line : d.explanation) {
    if (!out.empty()) out += "\n";
    out += line;
  }
  return out;
}

std::string_view status_message(DecisionValue value) {
  switch (value) {
    case DecisionValue::Permit: return "ok";
    case DecisionValue::Deny: return kMaskedExplanation;
    case DecisionValue::Indeterminate: return "indeterminate";
    case DecisionValue::NotApplicable: return "no applicable rule";
  }
  return "indeterminate";
}

XacmlResponseDoc to_response(const Decision& d) {
  XacmlResponseDoc resp;
  resp.decision = d.value;
  resp.status = std::string(status_message(d.value));
  resp.granted_right = d.granted_right;
  if (!d.masked && d.matched_rule) {
    resp.trace_rule = d.matched_rule;
    resp.trace = d.explanation;
  }
  return resp;
}

}  // namespace sac
