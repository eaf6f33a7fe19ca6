#pragma once

#include <cstdint>
#include <random>

#include "sac/knowledge_base.hpp"
#include "sac/pdp.hpp"

namespace sac {

struct GeneratorLimits {
  int max_concepts = 12;  // per ontology
  int max_rules = 8;
  int max_condition_depth = 2;
  int max_purposes = 6;
};

/// Seeded generator of random (ontology, policy, request) instances used by
/// the differential and invariant suites.
class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed, GeneratorLimits limits = {});

  PolicyStore random_store();

  /// Mostly well-formed requests against `store`, with occasional unknown
  /// concepts, untrusted issuers, missing and mistyped context values.
  AccessRequest random_request(const PolicyStore& store);

  ConditionExpr random_condition(int depth);
  OntologyGraph random_graph(OntologyKind kind, int max_nodes);

  std::mt19937_64& rng() { return rng_; }

 private:
  int uniform(int lo, int hi);  // inclusive
  bool chance(double p);

  std::mt19937_64 rng_;
  GeneratorLimits limits_;
};

/// Request drawn from a loaded bundle: concepts and actions uniformly from
/// the ontologies, context values from the registry's declared ranges.
AccessRequest random_bundle_request(const PolicyStore& store, const KnowledgeBase& kb,
                                    std::mt19937_64& rng);

}  // namespace sac
