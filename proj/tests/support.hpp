#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "sac/bundle.hpp"
#include "sac/gateway.hpp"
#include "sac/knowledge_base.hpp"
#include "sac/ontology.hpp"
#include "sac/pdp.hpp"

namespace httplib {
class Server;
}

namespace sactest {

std::filesystem::path fixture(const std::string& relative);
std::string slurp(const std::filesystem::path& path);

/// The shipped e-health bundle (loaded once).
const sac::LoadedBundle& ehealth();
sac::BundlePaths ehealth_paths();

/// A canned request from the e-health bundle, enriched against it.
sac::AccessRequest ehealth_request(const std::string& file);

/// Wire request for the bundle: subject with optional credential and
/// years_of_service, resource, action, purpose.
sac::XacmlRequestDoc wire_request(const std::string& subject, const std::string& resource,
                                  const std::string& action, const std::string& purpose);

sac::Decision decide_wire(const sac::XacmlRequestDoc& doc);
sac::Decision oracle_wire(const sac::XacmlRequestDoc& doc);

/// Brute-force ancestor sets: for every id (including the top under its
/// reserved name), the set of ids reachable along is-a edges plus itself
/// plus the top. Computed by plain DFS from the raw edge list.
std::map<std::string, std::set<std::string>> reachability(const sac::OntologyGraph& g);

/// Builder pre-populated with every node and edge of `g`.
sac::OntologyBuilder builder_from(const sac::OntologyGraph& g);

/// Store with the e-health graphs, purposes and trust set but `rules`.
sac::PolicyStore store_with_rules(std::vector<sac::AccessRule> rules);

/// Same parts as `store` with a different policy / SO graph.
sac::PolicyStore with_policy(const sac::PolicyStore& store, sac::PolicyDocument policy);
sac::PolicyStore with_so(const sac::PolicyStore& store, const sac::OntologyGraph& so);

/// Minimal HTTP server standing in for the protected resource.
class StubUpstream {
 public:
  StubUpstream();
  ~StubUpstream();
  int port() const { return port_; }
  std::string url() const;
  int hits() const { return hits_.load(); }

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
};

inline constexpr const char* kUpstreamBody = "upstream body for ";

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

/// Runs the sacpdp binary with `args` (shell-quoted by the caller).
CliResult run_cli(const std::string& args, const std::string& env = "");

/// Fresh temporary directory under the system temp path.
std::filesystem::path temp_dir(const std::string& tag);

/// All JSON lines of an audit log.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace sactest
