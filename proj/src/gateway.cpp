#include "sac/gateway.hpp"

#include <cctype>
#include <cstdlib>
#include <ctime>

#include <httplib.h>
#include <json.hpp>

#include "sac/error.hpp"
#include "sac/parser.hpp"

namespace sac {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

ClientResponse text(int status, std::string body) {
  ClientResponse r;
  r.status = status;
  r.body = std::move(body);
  return r;
}

std::optional<std::string> first(const std::multimap<std::string, std::string>& m,
                                 const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

GatewayConfig parse_gateway_config(const KeyValues& kv, const fs::path& base_dir) {
  auto required = [&](std::string_view key) {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) {
      throw Error(ErrorCode::ConfigError, "missing key '" + std::string(key) + "'");
    }
    return it->second;
  };
  GatewayConfig cfg;
  const auto listen = required("listen");
  const auto colon = listen.rfind(':');
  int port = -1;
  if (colon != std::string::npos && colon > 0) {
    try {
      std::size_t used = 0;
      port = std::stoi(listen.substr(colon + 1), &used);
      if (used != listen.size() - colon - 1) port = -1;
    } catch (const std::exception&) {
      port = -1;
    }
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::ConfigError, "key 'listen' must be host:port, got '" + listen + "'");
  }
  cfg.listen_host = listen.substr(0, colon);
  cfg.listen_port = port;
  cfg.upstream = required("upstream");
  fs::path audit(required("audit_log"));
  cfg.audit_log = audit.is_absolute() ? audit : base_dir / audit;
  cfg.bundle = bundle_paths_from(kv, base_dir);
  return cfg;
}

fs::path resolve_config_path(const fs::path& given) {
  if (const char* env = std::getenv(std::string(kConfigEnvVar).c_str()); env && *env) return env;
  return given;
}

GatewayConfig load_gateway_config(const fs::path& path) {
  return parse_gateway_config(parse_key_values(read_file(path)), path.parent_path());
}

// ---------------------------------------------------------------------------
// Audit

std::string to_json_line(const AuditRecord& r) {
  nlohmann::json j;
  j["timestamp"] = r.timestamp;
  j["endpoint"] = r.endpoint;
  j["subject_id"] = r.subject_id;
  j["object_id"] = r.object_id;
  j["action"] = r.action;
  j["purpose"] = r.purpose;
  j["decision"] = r.decision ? nlohmann::json(std::string(to_string(*r.decision))) : nullptr;
  j["masked"] = r.masked;
  j["matched_rule"] = r.matched_rule && !r.masked ? nlohmann::json(*r.matched_rule) : nullptr;
  j["latency_ms"] = r.latency_ms;
  j["store_version"] = r.store_version;
  j["http_status"] = r.http_status;
  j["error"] = r.error ? nlohmann::json(*r.error) : nullptr;
  j["conflicts"] = r.conflicts;
  return j.dump();
}

AuditLog::AuditLog(const fs::path& path) : out_(path, std::ios::app) {
  if (!out_) throw Error(ErrorCode::IoError, "cannot open audit log " + path.string());
}

void AuditLog::append(const AuditRecord& record) {
  const auto line = to_json_line(record);
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
  ++count_;
}

void AuditLog::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
}

std::size_t AuditLog::count() const {
  std::lock_guard lock(mu_);
  return count_;
}

// ---------------------------------------------------------------------------
// Helpers

std::optional<std::string> ClientResponse::header(std::string_view name) const {
  const auto key = lower(name);
  for (const auto& [k, v] : headers) {
    if (lower(k) == key) return v;
  }
  return std::nullopt;
}

std::string action_for_method(std::string_view method) {
  if (method == "GET" || method == "HEAD") return "read";
  if (method == "PUT" || method == "PATCH") return "write";
  if (method == "POST") return "create";
  if (method == "DELETE") return "delete";
  return lower(method);
}

AttributeDescriptor parse_attribute_header(std::string_view text) {
  std::map<std::string, std::string, std::less<>> fields;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(';', pos);
    if (end == std::string_view::npos) end = text.size();
    auto item = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidDocument, "attribute field '" + std::string(item) +
                                                  "' is not key=value");
    }
    fields[std::string(trim(item.substr(0, eq)))] = std::string(trim(item.substr(eq + 1)));
  }
  auto get = [&](std::string_view key) -> std::string {
    auto it = fields.find(key);
    return it == fields.end() ? std::string() : it->second;
  };
  AttributeDescriptor a;
  a.name = get("name");
  a.attribute_id = get("attributeID");
  if (a.attribute_id.empty()) a.attribute_id = a.name;
  a.soa_id = get("soa");
  a.equivalence_enabled = parse_equivalence_flag(get("e"));
  if (a.name.empty()) throw Error(ErrorCode::InvalidDocument, "attribute without name");
  if (fields.count("value")) {
    const auto type_text = get("valueType");
    const auto type = type_text.empty() ? std::optional(ScalarType::String)
                                        : parse_scalar_type(type_text);
    if (!type) throw Error(ErrorCode::InvalidDocument, "unknown valueType '" + type_text + "'");
    a.value = parse_scalar(*type, get("value"));
  }
  return a;
}

namespace {

std::optional<ClientResponse> forward(httplib::Client& client, const ClientRequest& req) {
  httplib::Request out;
  out.method = req.method;
  out.path = req.path;
  if (!req.query.empty()) {
    httplib::Params params(req.query.begin(), req.query.end());
    out.path = httplib::append_query_params(req.path, params);
  }
  for (const auto& [k, v] : req.headers) {
    if (k == "host" || k == "content-length" || k.rfind("x-subject", 0) == 0) continue;
    out.headers.emplace(k, v);
  }
  out.body = req.body;
  auto res = client.send(out);
  if (!res) return std::nullopt;
  ClientResponse r;
  r.status = res->status;
  r.body = res->body;
  r.content_type = res->get_header_value("Content-Type");
  if (r.content_type.empty()) r.content_type = "application/octet-stream";
  return r;
}

}  // namespace

UpstreamFn http_upstream(const std::string& base_url) {
  return [base_url](const ClientRequest& req) -> std::optional<ClientResponse> {
    httplib::Client client(base_url);
    client.set_connection_timeout(2);
    client.set_read_timeout(10);
    return forward(client, req);
  };
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(LoadedBundle initial, UpstreamFn upstream, std::shared_ptr<AuditLog> audit)
    : snapshot_(std::make_shared<const Snapshot>(Snapshot{initial.store, initial.kb})),
      upstream_(std::move(upstream)),
      audit_(std::move(audit)) {}

std::shared_ptr<const Snapshot> Gateway::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return snapshot_;
}

Evaluation Gateway::evaluate(const XacmlRequestDoc& doc) const {
  const auto snap = snapshot();
  Evaluation ev{{}, enrich(doc, *snap->kb, snap->store->trusted_soas())};
  ev.decision = decide(*snap->store, ev.enriched.request);
  return ev;
}

void Gateway::record(AuditRecord rec, std::chrono::steady_clock::time_point start) {
  rec.timestamp = utc_now();
  rec.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (rec.masked) rec.matched_rule.reset();
  if (audit_) audit_->append(rec);
}

ClientResponse Gateway::handle_client_request(const ClientRequest& req) {
  const auto start = std::chrono::steady_clock::now();
  AuditRecord rec;
  rec.endpoint = "proxy";
  rec.object_id = req.path;
  try {
    const auto snap = snapshot();
    rec.store_version = snap->version();

    // (1) receive: identify subject, action, purpose
    XacmlRequestDoc doc;
    doc.subject_id = first(req.headers, "x-subject-id").value_or("");
    rec.subject_id = doc.subject_id;
    doc.action_id = first(req.headers, "x-action").value_or(action_for_method(req.method));
    rec.action = doc.action_id;
    doc.purpose = first(req.query, "purpose").value_or(first(req.headers, "x-purpose").value_or(""));
    rec.purpose = doc.purpose;
    if (doc.subject_id.empty()) throw Error(ErrorCode::MissingCategory, "missing X-Subject-Id");
    if (doc.purpose.empty()) throw Error(ErrorCode::MissingCategory, "missing purpose");
    if (!snap->store->purposes().contains(doc.purpose)) {
      throw Error(ErrorCode::UnknownPurpose, "unknown purpose '" + doc.purpose + "'");
    }
    if (auto roles = first(req.headers, "x-subject-roles")) {
      for (const auto& r : split_list(*roles)) doc.subject_concepts.push_back(r);
    }
    auto [lo, hi] = req.headers.equal_range("x-subject-attribute");
    for (auto it = lo; it != hi; ++it) doc.subject_attributes.push_back(parse_attribute_header(it->second));

    // (2) knowledge base lookup of the resource
    doc.resource_id = snap->kb->object_for_path(req.path).value_or(req.path);
    rec.object_id = doc.resource_id;

    // (3) wire request; (4)-(5) decision
    const auto wire = parse_xacml_request(serialize_xacml_request(doc));
    auto enriched = enrich(wire, *snap->kb, snap->store->trusted_soas());
    const auto d = decide(*snap->store, enriched.request);
    rec.conflicts = std::move(enriched.conflicts);
    rec.decision = d.value;
    rec.masked = d.masked;
    rec.matched_rule = d.matched_rule;

    // (6) enforce
    ClientResponse resp;
    if (d.value == DecisionValue::Permit) {
      auto upstream = upstream_ ? upstream_(req) : std::nullopt;
      if (!upstream) {
        resp = text(502, "upstream unreachable");
      } else {
        resp = std::move(*upstream);
      }
    } else {
      resp = text(403, explain(d));
    }
    resp.headers.emplace_back("X-Decision", std::string(to_string(d.value)));
    resp.headers.emplace_back("X-Status", std::string(status_message(d.value)));
    resp.headers.emplace_back("X-Store-Version", std::to_string(d.store_version));
    rec.http_status = resp.status;
    record(std::move(rec), start);
    return resp;
  } catch (const Error& e) {
    rec.error = std::string(to_string(e.code()));
    rec.http_status = 400;
    record(std::move(rec), start);
    return text(400, e.what());
  } catch (const std::exception&) {
    rec.error = "internal";
    rec.http_status = 500;
    record(std::move(rec), start);
    return text(500, "internal error");
  }
}

ClientResponse Gateway::query_decision(std::string_view body) {
  const auto start = std::chrono::steady_clock::now();
  AuditRecord rec;
  rec.endpoint = "decide";
  try {
    const auto doc = parse_xacml_request(body);
    rec.subject_id = doc.subject_id;
    rec.object_id = doc.resource_id;
    rec.action = doc.action_id;
    rec.purpose = doc.purpose;
    auto ev = evaluate(doc);
    rec.store_version = ev.decision.store_version;
    rec.decision = ev.decision.value;
    rec.masked = ev.decision.masked;
    rec.matched_rule = ev.decision.matched_rule;
    rec.conflicts = std::move(ev.enriched.conflicts);
    ClientResponse resp = text(200, serialize_xacml_response(to_response(ev.decision)));
    resp.content_type = "application/xml";
    resp.headers.emplace_back("X-Store-Version", std::to_string(ev.decision.store_version));
    rec.http_status = 200;
    record(std::move(rec), start);
    return resp;
  } catch (const Error& e) {
    rec.error = std::string(to_string(e.code()));
    rec.http_status = 400;
    record(std::move(rec), start);
    return text(400, e.what());
  } catch (const std::exception&) {
    rec.error = "internal";
    rec.http_status = 500;
    record(std::move(rec), start);
    return text(500, "internal error");
  }
}

std::uint64_t Gateway::admin_load(AdminKind kind, std::optional<OntologyKind> ontology,
                                  std::string_view document) {
  std::lock_guard writer(admin_mu_);
  const auto cur = snapshot();
  const auto& store = *cur->store;

  PolicyDocument policy = store.policy();
  OntologySet ontologies = store.ontologies();
  PurposeTree purposes = store.purposes();
  auto kb = cur->kb;

  switch (kind) {
    case AdminKind::Policy:
      policy = parse_spl_policy(document);
      break;
    case AdminKind::Ontology: {
      if (!ontology) throw Error(ErrorCode::ConfigError, "ontology kind required");
      ontologies.slot(*ontology) =
          std::make_shared<const OntologyGraph>(load_ontology(document, *ontology));
      break;
    }
    case AdminKind::Purposes:
      purposes = parse_purpose_tree(document);
      break;
    case AdminKind::Registry:
      kb = std::make_shared<const KnowledgeBase>(parse_registry(document));
      break;
  }
  auto registry_findings = validate_registry(*kb, ontologies);
  if (!registry_findings.empty()) throw ValidationError(std::move(registry_findings));

  auto next = PolicyStore::activate(std::move(policy), std::move(ontologies), std::move(purposes),
                                    store.trusted_soas(), store.version() + 1);
  auto snap = std::make_shared<const Snapshot>(
      Snapshot{std::make_shared<const PolicyStore>(std::move(next)), kb});
  const auto version = snap->version();
  std::lock_guard lock(snapshot_mu_);
  snapshot_ = std::move(snap);
  return version;
}

ClientResponse Gateway::admin_request(std::string_view target, std::string_view document) {
  AdminKind kind;
  std::optional<OntologyKind> ontology;
  if (target == "policy") {
    kind = AdminKind::Policy;
  } else if (target == "purposes") {
    kind = AdminKind::Purposes;
  } else if (target == "registry") {
    kind = AdminKind::Registry;
  } else if (target.rfind("ontology/", 0) == 0) {
    kind = AdminKind::Ontology;
    ontology = parse_ontology_kind(target.substr(9));
    if (!ontology) return text(404, "unknown ontology '" + std::string(target.substr(9)) + "'");
  } else {
    return text(404, "unknown admin target '" + std::string(target) + "'");
  }
  try {
    return text(200, "version " + std::to_string(admin_load(kind, ontology, document)) + "\n");
  } catch (const ValidationError& e) {
    return text(422, format_report(e.report()));
  } catch (const Error& e) {
    return text(422, std::string(e.what()) + "\n");
  } catch (const std::exception&) {
    return text(500, "internal error");
  }
}

// ---------------------------------------------------------------------------
// HTTP wiring

namespace {

void send(httplib::Response& res, const ClientResponse& r) {
  res.status = r.status;
  for (const auto& [k, v] : r.headers) res.set_header(k, v);
  res.set_content(r.body, r.content_type);
}

ClientRequest from_http(const httplib::Request& req, std::string path) {
  ClientRequest out;
  out.method = req.method;
  out.path = std::move(path);
  for (const auto& [k, v] : req.params) out.query.emplace(k, v);
  for (const auto& [k, v] : req.headers) out.headers.emplace(lower(k), v);
  out.body = req.body;
  return out;
}

}  // namespace

void install_routes(httplib::Server& server, Gateway& gateway) {
  auto proxy = [&gateway](const httplib::Request& req, httplib::Response& res) {
    send(res, gateway.handle_client_request(from_http(req, "/" + req.matches[1].str())));
  };
  const std::string pattern = "/proxy/(.*)";
  server.Get(pattern, proxy);
  server.Post(pattern, proxy);
  server.Put(pattern, proxy);
  server.Patch(pattern, proxy);
  server.Delete(pattern, proxy);
  server.Options(pattern, proxy);

  server.Post("/pdp/decide", [&gateway](const httplib::Request& req, httplib::Response& res) {
    send(res, gateway.query_decision(req.body));
  });
  server.Put("/admin/(.*)", [&gateway](const httplib::Request& req, httplib::Response& res) {
    send(res, gateway.admin_request(req.matches[1].str(), req.body));
  });
  server.Get("/admin/version", [&gateway](const httplib::Request&, httplib::Response& res) {
    res.set_content(std::to_string(gateway.version()) + "\n", "text/plain");
  });
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok\n", "text/plain");
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                  std::exception_ptr) {
    res.status = 500;
    res.set_content("internal error", "text/plain");
  });
}

}  // namespace sac
