#include "sac/random_instance.hpp"

#include <algorithm>

namespace sac {

namespace {

const char* prefix_of(OntologyKind kind) {
  switch (kind) {
    case OntologyKind::SO: return "s";
    case OntologyKind::OO: return "o";
    case OntologyKind::AO: return "a";
    case OntologyKind::AtO: return "t";
  }
  return "x";
}

int draw(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng, double p) {
  return std::bernoulli_distribution(p)(rng);
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[static_cast<std::size_t>(draw(rng, 0, static_cast<int>(items.size()) - 1))];
}

std::vector<std::string> ids_of(const OntologyGraph& g) {
  std::vector<std::string> out;
  for (const auto& [id, kind] : g.nodes()) out.push_back(id);
  return out;
}

const std::vector<std::string> kSoas = {"soaA", "soaB", "soaX"};

}  // namespace

InstanceGenerator::InstanceGenerator(std::uint64_t seed, GeneratorLimits limits)
    : rng_(seed), limits_(limits) {}

int InstanceGenerator::uniform(int lo, int hi) { return draw(rng_, lo, hi); }

bool InstanceGenerator::chance(double p) { return coin(rng_, p); }

OntologyGraph InstanceGenerator::random_graph(OntologyKind kind, int max_nodes) {
  OntologyBuilder b(kind);
  const int n = uniform(1, std::max(1, max_nodes));
  const bool with_individuals = kind == OntologyKind::OO || kind == OntologyKind::AO;
  std::vector<std::string> concepts;
  std::vector<std::string> all;
  for (int i = 0; i < n; ++i) {
    const std::string id = prefix_of(kind) + std::to_string(i);
    const bool individual = with_individuals && !concepts.empty() && chance(0.25);
    if (individual) {
      b.individual(id);
    } else {
      b.concept_node(id);
    }
    // parents only among earlier concepts, so the graph stays acyclic
    if (!concepts.empty()) {
      const int parents = uniform(individual ? 1 : 0, std::min<int>(2, concepts.size()));
      std::set<std::string> chosen;
      for (int p = 0; p < parents; ++p) chosen.insert(pick(rng_, concepts));
      for (const auto& parent : chosen) b.isa(id, parent);
    }
    if (!individual) concepts.push_back(id);
    all.push_back(id);
  }
  if (kind == OntologyKind::SO && concepts.size() > 1) {
    const int count = uniform(0, 3);
    std::set<std::pair<int, int>> seen;
    for (int k = 0; k < count; ++k) {
      int j = uniform(0, static_cast<int>(concepts.size()) - 1);
      int s = uniform(0, static_cast<int>(concepts.size()) - 1);
      if (j == s) continue;
      if (j > s) std::swap(j, s);
      if (seen.insert({j, s}).second) b.inherits(concepts[j], concepts[s]);
    }
  }
  if (kind == OntologyKind::AtO && all.size() > 1) {
    const int count = uniform(0, 3);
    for (int k = 0; k < count; ++k) {
      const auto& x = pick(rng_, all);
      const auto& y = pick(rng_, all);
      if (x != y) b.equiv(x, y);
    }
  }
  return b.build();
}

ConditionExpr InstanceGenerator::random_condition(int depth) {
  if (depth > 0 && chance(0.35)) {
    std::vector<ConditionExpr> terms;
    const int n = uniform(1, 3);
    for (int i = 0; i < n; ++i) terms.push_back(random_condition(depth - 1));
    return chance(0.5) ? ConditionExpr::all_of(std::move(terms))
                       : ConditionExpr::any_of(std::move(terms));
  }
  static const CompareOp kOrdered[] = {CompareOp::Equals,      CompareOp::NotEquals,
                                       CompareOp::GreaterThan, CompareOp::GreaterThanOrEqual,
                                       CompareOp::LessThan,    CompareOp::LessThanOrEqual};
  switch (uniform(0, 4)) {
    case 0:
    case 1: {
      const std::string attr = chance(0.5) ? "n1" : "n2";
      if (chance(0.15)) {
        std::vector<Scalar> values;
        const int n = uniform(1, 3);
        for (int i = 0; i < n; ++i) values.emplace_back(std::int64_t{uniform(0, 5)});
        return ConditionExpr::one_of(attr, std::move(values));
      }
      Scalar ref = std::int64_t{uniform(0, 5)};
      if (chance(0.15)) ref = uniform(0, 10) / 2.0;
      if (chance(0.05)) ref = std::string("x");  // mistyped reference
      return ConditionExpr::compare(attr, kOrdered[uniform(0, 5)], ref);
    }
    case 2: {
      if (chance(0.3)) {
        return ConditionExpr::one_of("s1", {std::string("u"), std::string("v")});
      }
      const auto op = chance(0.9) ? (chance(0.5) ? CompareOp::Equals : CompareOp::NotEquals)
                                  : CompareOp::LessThan;  // ordering on strings is a mismatch
      return ConditionExpr::compare("s1", op, std::string(chance(0.5) ? "u" : "w"));
    }
    case 3:
      return ConditionExpr::compare("b1", chance(0.8) ? CompareOp::Equals : CompareOp::NotEquals,
                                    chance(0.5));
    default:
      return ConditionExpr::compare("m1", CompareOp::Equals, std::int64_t{1});  // rarely present
  }
}

PolicyStore InstanceGenerator::random_store() {
  OntologySet set;
  for (auto kind : kAllOntologyKinds) {
    set.slot(kind) = std::make_shared<const OntologyGraph>(random_graph(kind, limits_.max_concepts));
  }

  std::vector<std::pair<std::string, std::optional<std::string>>> entries;
  const int purposes = uniform(1, std::max(1, limits_.max_purposes));
  std::vector<std::string> purpose_ids;
  for (int i = 0; i < purposes; ++i) {
    const std::string id = "p" + std::to_string(i);
    std::optional<std::string> parent;
    if (i > 0) parent = pick(rng_, purpose_ids);
    entries.emplace_back(id, parent);
    purpose_ids.push_back(id);
  }
  auto tree = PurposeTree::build(entries);

  const auto so = ids_of(*set.so), oo = ids_of(*set.oo), ao = ids_of(*set.ao),
             ato = ids_of(*set.ato);
  PolicyDocument policy;
  policy.source_name = "random";
  policy.rights["r0"] = RightCategory{"r0", "", {pick(rng_, ao)}};
  policy.rights["r1"] = RightCategory{"r1", "", {}};

  auto ref_or_top = [&](const std::vector<std::string>& ids) {
    return chance(0.2) ? std::string(kTopConcept) : pick(rng_, ids);
  };
  const int rules = uniform(1, std::max(1, limits_.max_rules));
  for (int i = 0; i < rules; ++i) {
    AccessRule r;
    r.name = "rule" + std::to_string(i);
    r.is_public = chance(0.7);
    r.priority = uniform(0, 2);
    r.subject = {OntologyKind::SO, ref_or_top(so)};
    r.object = {OntologyKind::OO, ref_or_top(oo)};
    r.action = {OntologyKind::AO, ref_or_top(ao)};
    if (chance(0.3)) {
      AttributeDescriptor a;
      a.attribute_id = "cred" + std::to_string(i);
      a.name = pick(rng_, ato);
      a.soa_id = pick(rng_, kSoas);
      a.equivalence_enabled = chance(0.6);
      r.required_attributes.push_back(a);
    }
    if (chance(0.25)) r.subject_vars.push_back({pick(rng_, ato), VariableSide::Subject});
    if (chance(0.25)) r.object_vars.push_back({pick(rng_, ato), VariableSide::Object});
    r.purpose = chance(0.4) ? std::string(kAnyPurpose) : pick(rng_, purpose_ids);
    r.condition = chance(0.2) ? ConditionExpr::empty()
                              : random_condition(limits_.max_condition_depth);
    const int right = uniform(0, 2);
    if (right < 2) r.right = "r" + std::to_string(right);
    policy.rules.push_back(std::move(r));
  }
  return PolicyStore::activate(std::move(policy), std::move(set), std::move(tree),
                               {"soaA", "soaB"});
}

AccessRequest InstanceGenerator::random_request(const PolicyStore& store) {
  const auto so = ids_of(store.graph(OntologyKind::SO));
  const auto oo = ids_of(store.graph(OntologyKind::OO));
  const auto ao = ids_of(store.graph(OntologyKind::AO));
  const auto ato = ids_of(store.graph(OntologyKind::AtO));

  auto concepts = [&](const std::vector<std::string>& ids) {
    std::set<std::string> out;
    const int n = uniform(0, 2);
    for (int i = 0; i < n; ++i) out.insert(chance(0.05) ? std::string("unknown") : pick(rng_, ids));
    return out;
  };
  auto attributes = [&](const std::string& prefix) {
    std::vector<AttributeDescriptor> out;
    const int n = uniform(0, 3);
    for (int i = 0; i < n; ++i) {
      AttributeDescriptor a;
      a.attribute_id = prefix + std::to_string(i);
      a.name = chance(0.05) ? std::string("unknown") : pick(rng_, ato);
      a.soa_id = pick(rng_, kSoas);
      out.push_back(a);
    }
    return out;
  };

  AccessRequest req;
  req.subject_id = "subject";
  req.subject_concepts = concepts(so);
  req.subject_attributes = attributes("sa");
  req.object_id = "object";
  req.object_concepts = concepts(oo);
  req.object_attributes = attributes("oa");
  req.action = chance(0.05) ? std::string("unknown") : pick(rng_, ao);

  std::vector<std::string> purposes;
  for (const auto& [id, parent] : store.purposes().entries()) purposes.push_back(id);
  req.purpose = chance(0.05) ? std::string("unknown") : pick(rng_, purposes);

  for (const char* n : {"n1", "n2"}) {
    if (!chance(0.85)) continue;
    if (chance(0.05)) {
      req.context[n] = std::string("five");
    } else if (chance(0.1)) {
      req.context[n] = uniform(0, 10) / 2.0;
    } else {
      req.context[n] = std::int64_t{uniform(0, 5)};
    }
  }
  if (chance(0.85)) {
    req.context["s1"] = chance(0.05) ? Scalar{std::int64_t{1}}
                                     : Scalar{std::string(chance(0.5) ? "u" : "v")};
  }
  if (chance(0.85)) req.context["b1"] = chance(0.5);
  if (chance(0.1)) req.context["m1"] = std::int64_t{uniform(0, 1)};
  return req;
}

AccessRequest random_bundle_request(const PolicyStore& store, const KnowledgeBase& kb,
                                    std::mt19937_64& rng) {
  const auto so = ids_of(store.graph(OntologyKind::SO));
  const auto oo = ids_of(store.graph(OntologyKind::OO));
  const auto ao = ids_of(store.graph(OntologyKind::AO));
  const auto ato = ids_of(store.graph(OntologyKind::AtO));
  std::vector<std::string> soas(store.trusted_soas().begin(), store.trusted_soas().end());
  soas.push_back("untrusted");

  AccessRequest req;
  auto add_attribute = [&](std::vector<AttributeDescriptor>& out, const AttributeDescriptor& a) {
    out.push_back(a);
    if (a.value && store.trusts(a.soa_id)) req.context[a.attribute_id] = *a.value;
  };
  auto random_attributes = [&](std::vector<AttributeDescriptor>& out, const std::string& prefix) {
    const int n = draw(rng, 0, 2);
    for (int i = 0; i < n; ++i) {
      AttributeDescriptor a;
      a.attribute_id = prefix + std::to_string(i);
      a.name = pick(rng, ato);
      a.soa_id = pick(rng, soas);
      add_attribute(out, a);
    }
  };

  std::vector<std::string> subjects, objects;
  for (const auto& [id, rec] : kb.subjects) subjects.push_back(id);
  for (const auto& [id, rec] : kb.objects) objects.push_back(id);

  if (!subjects.empty() && coin(rng, 0.6)) {
    req.subject_id = pick(rng, subjects);
    const auto& rec = *kb.find_subject(req.subject_id);
    req.subject_concepts.insert(rec.concepts.begin(), rec.concepts.end());
    for (const auto& a : rec.attributes) add_attribute(req.subject_attributes, a);
  } else {
    req.subject_id = "anonymous";
    const int n = draw(rng, 0, 2);
    for (int i = 0; i < n; ++i) req.subject_concepts.insert(pick(rng, so));
    random_attributes(req.subject_attributes, "sattr");
  }
  if (!objects.empty() && coin(rng, 0.6)) {
    req.object_id = pick(rng, objects);
    const auto& rec = *kb.find_object(req.object_id);
    req.object_concepts.insert(rec.concepts.begin(), rec.concepts.end());
    for (const auto& a : rec.attributes) add_attribute(req.object_attributes, a);
  } else {
    req.object_id = "unregistered";
    const int n = draw(rng, 0, 2);
    for (int i = 0; i < n; ++i) req.object_concepts.insert(pick(rng, oo));
    random_attributes(req.object_attributes, "oattr");
  }
  req.action = pick(rng, ao);

  std::vector<std::string> purposes;
  for (const auto& [id, parent] : store.purposes().entries()) purposes.push_back(id);
  req.purpose = pick(rng, purposes);

  for (const auto& range : kb.ranges) {
    if (coin(rng, 0.15)) continue;  // absent
    if (!range.values.empty()) {
      req.context[range.attribute] = pick(rng, range.values);
    } else if (range.min && range.max && range.type == ScalarType::Int) {
      const auto lo = std::get<std::int64_t>(*range.min);
      const auto hi = std::get<std::int64_t>(*range.max);
      req.context[range.attribute] = std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    } else if (range.min && range.max && range.type == ScalarType::Decimal) {
      const auto lo = std::get<double>(*range.min);
      const auto hi = std::get<double>(*range.max);
      req.context[range.attribute] = std::uniform_real_distribution<double>(lo, hi)(rng);
    } else if (range.type == ScalarType::Bool) {
      req.context[range.attribute] = coin(rng, 0.5);
    }
  }
  return req;
}

}  // namespace sac
