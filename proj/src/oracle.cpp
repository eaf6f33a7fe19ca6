#include "sac/oracle.hpp"

#include <map>
#include <random>

#include "sac/random_instance.hpp"

namespace sac {

namespace {

using Matrix = std::vector<std::vector<bool>>;

void close_transitively(Matrix& m) {
  const std::size_t n = m.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (m[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (m[k][j]) m[i][j] = true;
}

// Explicit closure matrices for one ontology, built from its raw edge sets.
struct Closures {
  std::map<std::string, std::size_t, std::less<>> index;
  Matrix is_a;      // is_a[d][a]: d is subsumed by a
  Matrix holds;     // holds[s][j]: role s holds the rights of role j
  Matrix same;      // equivalence

  explicit Closures(const OntologyGraph& g) {
    index.emplace(std::string(kTopConcept), 0);
    if (!g.top_alias().empty()) index.emplace(g.top_alias(), 0);
    std::size_t next = 1;
    for (const auto& [id, kind] : g.nodes()) index.emplace(id, next++);
    const std::size_t n = next;
    auto square = [n] { return Matrix(n, std::vector<bool>(n, false)); };
    is_a = square();
    holds = square();
    same = square();
    for (std::size_t i = 0; i < n; ++i) {
      is_a[i][i] = holds[i][i] = same[i][i] = true;
      is_a[i][0] = true;
    }
    for (const auto& [child, parent] : g.isa_edges()) is_a[at(child)][at(parent)] = true;
    for (const auto& [junior, senior] : g.inherit_edges()) holds[at(senior)][at(junior)] = true;
    for (const auto& [a, b] : g.equiv_edges()) {
      same[at(a)][at(b)] = true;
      same[at(b)][at(a)] = true;
    }
    close_transitively(is_a);
    close_transitively(holds);
    close_transitively(same);
  }

  bool known(const std::string& id) const { return index.count(id) != 0; }
  std::size_t at(const std::string& id) const { return index.find(id)->second; }
};

struct Unknown {};  // unresolvable reference inside a matched rule

enum class Tri { T, F, M };

bool numeric(const Scalar& v) { return v.index() == 1 || v.index() == 3; }

long double number(const Scalar& v) {
  return v.index() == 1 ? static_cast<long double>(std::get<1>(v))
                        : static_cast<long double>(std::get<3>(v));
}

// Returns nullopt on a type mismatch.
std::optional<int> order(const Scalar& a, const Scalar& b) {
  if (numeric(a) && numeric(b)) {
    if (a.index() == 1 && b.index() == 1) {
      auto x = std::get<1>(a), y = std::get<1>(b);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    auto x = number(a), y = number(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  return std::nullopt;
}

std::optional<bool> equal(const Scalar& a, const Scalar& b) {
  if (auto o = order(a, b)) return *o == 0;
  if (a.index() != b.index() || numeric(a) || numeric(b)) return std::nullopt;
  return a == b;
}

// Tri-valued interpreter; sets `error` on a type mismatch anywhere.
Tri interpret(const ConditionExpr& e, const Context& ctx, bool& error) {
  if (e.node.index() == 0) return Tri::T;
  if (e.node.index() == 1) {
    const auto& c = std::get<Comparison>(e.node);
    auto it = ctx.find(c.attribute);
    if (it == ctx.end()) return Tri::M;
    const auto& v = it->second;
    bool result = false;
    if (c.op == CompareOp::In || c.op == CompareOp::Equals || c.op == CompareOp::NotEquals) {
      bool any = false;
      for (const auto& ref : c.reference) {
        auto eq = equal(v, ref);
        if (!eq) {
          error = true;
          return Tri::F;
        }
        any = any || *eq;
      }
      result = c.op == CompareOp::NotEquals ? !any : any;
    } else {
      auto o = order(v, c.reference.front());
      if (!o) {
        error = true;
        return Tri::F;
      }
      switch (c.op) {
        case CompareOp::GreaterThan: result = *o > 0; break;
        case CompareOp::GreaterThanOrEqual: result = *o >= 0; break;
        case CompareOp::LessThan: result = *o < 0; break;
        default: result = *o <= 0; break;
      }
    }
    return result ? Tri::T : Tri::F;
  }
  const bool conj = e.node.index() == 2;
  const auto& terms = conj ? std::get<AllOf>(e.node).terms : std::get<AnyOf>(e.node).terms;
  std::vector<Tri> values;
  for (const auto& t : terms) values.push_back(interpret(t, ctx, error));
  auto has = [&](Tri x) {
    for (auto v : values) if (v == x) return true;
    return false;
  };
  if (conj) return has(Tri::F) ? Tri::F : (has(Tri::M) ? Tri::M : Tri::T);
  return has(Tri::T) ? Tri::T : (has(Tri::M) ? Tri::M : Tri::F);
}

DecisionValue oracle_rule(const AccessRule& rule, const AccessRequest& req,
                          const PolicyStore& store, const Closures& so, const Closures& oo,
                          const Closures& ao, const Closures& ato) {
  const auto& trusted = store.trusted_soas();
  try {
    for (const auto& c : req.subject_concepts) if (!so.known(c)) throw Unknown{};
    bool subject = false;
    for (const auto& c : req.subject_concepts)
      for (const auto& [name, r] : so.index)
        if (so.holds[so.at(c)][r] && so.is_a[r][so.at(rule.subject.id)]) subject = true;
    if (!subject) return DecisionValue::NotApplicable;

    for (const auto& c : req.object_concepts) if (!oo.known(c)) throw Unknown{};
    bool object = false;
    for (const auto& c : req.object_concepts)
      if (oo.is_a[oo.at(c)][oo.at(rule.object.id)]) object = true;
    if (!object) return DecisionValue::NotApplicable;

    if (!ao.known(req.action)) throw Unknown{};
    if (!ao.is_a[ao.at(req.action)][ao.at(rule.action.id)]) return DecisionValue::NotApplicable;

    for (const auto& required : rule.required_attributes) {
      bool ok = false;
      for (const auto& a : req.subject_attributes) {
        if (!trusted.count(a.soa_id) || !ato.known(a.name)) continue;
        const bool accepted = required.equivalence_enabled
                                  ? ato.same[ato.at(a.name)][ato.at(required.name)]
                                  : a.name == required.name;
        if (accepted) ok = true;
      }
      if (!ok) return DecisionValue::NotApplicable;
    }
    auto bound = [&](const AttributeVariable& v, const std::vector<AttributeDescriptor>& attrs) {
      for (const auto& a : attrs)
        if (trusted.count(a.soa_id) && ato.known(a.name) && ato.is_a[ato.at(a.name)][ato.at(v.name)])
          return true;
      return false;
    };
    for (const auto& v : rule.subject_vars)
      if (!bound(v, req.subject_attributes)) return DecisionValue::NotApplicable;
    for (const auto& v : rule.object_vars)
      if (!bound(v, req.object_attributes)) return DecisionValue::NotApplicable;
  } catch (const Unknown&) {
    return DecisionValue::Indeterminate;
  }

  // purpose: walk the requested purpose up to the root
  const auto& entries = store.purposes().entries();
  if (!entries.count(req.purpose)) return DecisionValue::Indeterminate;
  bool purpose_ok = rule.purpose == kAnyPurpose;
  for (std::optional<std::string> p = req.purpose; p && !purpose_ok;
       p = entries.find(*p)->second) {
    if (*p == rule.purpose) purpose_ok = true;
  }

  bool error = false;
  const Tri cond = interpret(rule.condition, req.context, error);
  if (error || cond == Tri::M) return DecisionValue::Indeterminate;
  return purpose_ok && cond == Tri::T ? DecisionValue::Permit : DecisionValue::Deny;
}

}  // namespace

Decision oracle_decide(const PolicyStore& store, const AccessRequest& req) {
  const Closures so(store.graph(OntologyKind::SO));
  const Closures oo(store.graph(OntologyKind::OO));
  const Closures ao(store.graph(OntologyKind::AO));
  const Closures ato(store.graph(OntologyKind::AtO));

  const auto& rules = store.policy().rules;
  std::vector<DecisionValue> outcomes;
  for (const auto& rule : rules) outcomes.push_back(oracle_rule(rule, req, store, so, oo, ao, ato));

  Decision d;
  d.store_version = store.version();
  bool any = false;
  std::int64_t top = 0;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (outcomes[i] == DecisionValue::NotApplicable) continue;
    top = any ? std::max(top, rules[i].priority) : rules[i].priority;
    any = true;
  }
  if (!any) {
    d.value = DecisionValue::NotApplicable;
    return d;
  }
  // Deny over Permit over Indeterminate; earliest rule wins a tie.
  std::optional<std::size_t> chosen;
  for (auto wanted : {DecisionValue::Deny, DecisionValue::Permit, DecisionValue::Indeterminate}) {
    for (std::size_t i = 0; i < rules.size() && !chosen; ++i) {
      if (rules[i].priority == top && outcomes[i] == wanted) chosen = i;
    }
    if (chosen) break;
  }
  const auto& rule = rules[*chosen];
  d.value = outcomes[*chosen];
  d.masked = !rule.is_public && d.value != DecisionValue::Permit;
  if (!d.masked) d.matched_rule = rule.name;
  if (d.value == DecisionValue::Permit && !rule.right.empty()) d.granted_right = rule.right;
  return d;
}

bool same_decision(const Decision& a, const Decision& b) {
  return a.value == b.value && a.granted_right == b.granted_right &&
         a.matched_rule == b.matched_rule && a.masked == b.masked;
}

std::string describe_request(const AccessRequest& req) {
  auto list = [](const auto& items) {
    std::string out = "{";
    bool first = true;
    for (const auto& i : items) {
      if (!first) out += ",";
      out += i;
      first = false;
    }
    return out + "}";
  };
  auto attrs = [](const std::vector<AttributeDescriptor>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ",";
      out += v[i].name + "@" + v[i].soa_id;
    }
    return out + "]";
  };
  std::string ctx = "{";
  bool first = true;
  for (const auto& [k, v] : req.context) {
    if (!first) ctx += ",";
    ctx += k + "=" + format_scalar(v) + ":" + std::string(to_string(type_of(v)));
    first = false;
  }
  ctx += "}";
  return "subject=" + req.subject_id + list(req.subject_concepts) + attrs(req.subject_attributes) +
         " object=" + req.object_id + list(req.object_concepts) + attrs(req.object_attributes) +
         " action=" + req.action + " purpose=" + req.purpose + " context=" + ctx;
}

OracleReport run_oracle_suite(const LoadedBundle& bundle,
                              const std::vector<std::pair<std::string, XacmlRequestDoc>>& canned,
                              std::size_t random_count, std::uint64_t seed,
                              const DecideFn& engine) {
  OracleReport report;
  report.text = "seed=" + std::to_string(seed) + " canned=" + std::to_string(canned.size()) +
                " random=" + std::to_string(random_count) + "\n";
  auto check = [&](const std::string& label, const AccessRequest& req) {
    const auto got = engine(*bundle.store, req);
    const auto want = oracle_decide(*bundle.store, req);
    if (!same_decision(got, want)) {
      ++report.mismatches;
      report.text += "mismatch " + label + ": decide=" + std::string(to_string(got.value)) +
                     (got.matched_rule ? "(" + *got.matched_rule + ")" : "") +
                     " oracle=" + std::string(to_string(want.value)) +
                     (want.matched_rule ? "(" + *want.matched_rule + ")" : "") +
                     " request=" + describe_request(req) + "\n";
    }
  };
  for (const auto& [name, doc] : canned) {
    check(name, enrich(doc, *bundle.kb, bundle.store->trusted_soas()).request);
    ++report.canned;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < random_count; ++i) {
    check("random#" + std::to_string(i), random_bundle_request(*bundle.store, *bundle.kb, rng));
    ++report.random;
  }
  report.text += "mismatches=" + std::to_string(report.mismatches) + "\n";
  return report;
}

}  // namespace sac
