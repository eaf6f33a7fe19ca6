#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sac/bundle.hpp"
#include "sac/pdp.hpp"

namespace sac {

/// Reference decision point for fixture-scale inputs. Shares no evaluation
/// code with decide(): closures are materialized as explicit reachability
/// matrices (Floyd-Warshall) from the raw edge sets, conditions and purposes
/// are evaluated by a separate interpreter, and every rule is evaluated.
Decision oracle_decide(const PolicyStore& store, const AccessRequest& req);

/// Fields covered by the decision contract (the explanation text is not).
bool same_decision(const Decision& a, const Decision& b);

std::string describe_request(const AccessRequest& req);

struct OracleReport {
  std::size_t canned = 0;
  std::size_t random = 0;
  std::size_t mismatches = 0;
  std::string text;
};

/// Runs `engine` against oracle_decide on the canned requests plus `random_count`
/// requests drawn with `seed`. The report text is reproducible for a fixed seed.
OracleReport run_oracle_suite(const LoadedBundle& bundle,
                              const std::vector<std::pair<std::string, XacmlRequestDoc>>& canned,
                              std::size_t random_count, std::uint64_t seed,
                              const DecideFn& engine);

}  // namespace sac
