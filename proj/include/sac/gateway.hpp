#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sac/bundle.hpp"
#include "sac/knowledge_base.hpp"
#include "sac/pdp.hpp"

namespace httplib {
class Server;
}

namespace sac {

struct GatewayConfig {
  std::string listen_host;
  int listen_port = 0;
  std::string upstream;  // base URL, e.g. http://127.0.0.1:9000
  std::filesystem::path audit_log;
  BundlePaths bundle;
};

inline constexpr std::string_view kConfigEnvVar = "SACPDP_CONFIG";

/// Parses the flat config (`listen`, `upstream`, `audit_log` plus the bundle
/// keys). Relative paths resolve against `base_dir`. Throws Error(ConfigError)
/// naming the first missing or malformed key.
GatewayConfig parse_gateway_config(const KeyValues& kv, const std::filesystem::path& base_dir);

/// The config file to use: $SACPDP_CONFIG when set, otherwise `given`.
std::filesystem::path resolve_config_path(const std::filesystem::path& given);

GatewayConfig load_gateway_config(const std::filesystem::path& path);

struct AuditRecord {
  std::string timestamp;  // UTC, ISO 8601 with milliseconds
  std::string subject_id;
  std::string object_id;
  std::string action;
  std::string purpose;
  std::optional<DecisionValue> decision;  // unset on error paths
  bool masked = false;
  std::optional<std::string> matched_rule;  // never set when masked
  double latency_ms = 0;
  std::uint64_t store_version = 0;
  int http_status = 0;
  std::string endpoint;  // "proxy" or "decide"
  std::optional<std::string> error;
  std::vector<std::string> conflicts;
};

std::string to_json_line(const AuditRecord& record);

/// Append-only JSON-lines writer; one line per record, flushed on write.
class AuditLog {
 public:
  explicit AuditLog(const std::filesystem::path& path);  // throws Error(IoError)
  void append(const AuditRecord& record);
  void flush();
  std::size_t count() const;

 private:
  mutable std::mutex mu_;
  std::ofstream out_;
  std::size_t count_ = 0;
};

/// Transport-neutral view of a client request on the enforcement path.
struct ClientRequest {
  std::string method;  // GET, PUT, ...
  std::string path;    // resource path, without the /proxy prefix
  std::multimap<std::string, std::string> query;
  std::multimap<std::string, std::string> headers;  // names lower-cased
  std::string body;
};

struct ClientResponse {
  int status = 200;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::string content_type = "text/plain";

  std::optional<std::string> header(std::string_view name) const;
};

/// Forwards a permitted request; nullopt when the upstream cannot be reached.
using UpstreamFn = std::function<std::optional<ClientResponse>(const ClientRequest&)>;

/// HTTP forwarding to `base_url` (scheme://host:port).
UpstreamFn http_upstream(const std::string& base_url);

enum class AdminKind { Policy, Ontology, Purposes, Registry };

/// Immutable state a single request is evaluated against.
struct Snapshot {
  std::shared_ptr<const PolicyStore> store;
  std::shared_ptr<const KnowledgeBase> kb;
  std::uint64_t version() const { return store->version(); }
};

struct Evaluation {
  Decision decision;
  EnrichedRequest enriched;
};

/// The enforcement gateway: request enrichment, decision, forwarding,
/// auditing and hot replacement of the active documents.
class Gateway {
 public:
  Gateway(LoadedBundle initial, UpstreamFn upstream, std::shared_ptr<AuditLog> audit);

  std::shared_ptr<const Snapshot> snapshot() const;
  std::uint64_t version() const { return snapshot()->version(); }

  /// Enrichment plus decision against one snapshot.
  Evaluation evaluate(const XacmlRequestDoc& doc) const;

  /// The enforced pass-through: 200 (relayed upstream response) only on Permit.
  ClientResponse handle_client_request(const ClientRequest& req);

  /// Pure decision endpoint over the wire format.
  ClientResponse query_decision(std::string_view body);

  /// Replaces one document, revalidates everything that depends on it and
  /// swaps the snapshot. Returns the new version. Throws ValidationError or
  /// Error; the active snapshot is unchanged on failure.
  std::uint64_t admin_load(AdminKind kind, std::optional<OntologyKind> ontology,
                           std::string_view document);

  /// `target` is the part after /admin/ (policy, ontology/SO, ...).
  ClientResponse admin_request(std::string_view target, std::string_view document);

 private:
  void record(AuditRecord rec, std::chrono::steady_clock::time_point start);

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::mutex admin_mu_;  // serializes writers
  UpstreamFn upstream_;
  std::shared_ptr<AuditLog> audit_;
};

/// Action implied by an HTTP method: GET/HEAD read, PUT/PATCH write,
/// POST create, DELETE delete.
std::string action_for_method(std::string_view method);

/// Parses one `X-Subject-Attribute` header value:
/// `attributeID=..;name=..;soa=..;valueType=..;value=..;e=Enabled`.
AttributeDescriptor parse_attribute_header(std::string_view text);

/// Wires the HTTP routes onto `server`.
void install_routes(httplib::Server& server, Gateway& gateway);

}  // namespace sac
