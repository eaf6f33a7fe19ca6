#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "properties.hpp"
#include "sac/error.hpp"
#include "sac/gateway.hpp"
#include "sac/parser.hpp"
#include "support.hpp"

using namespace sac;
using sactest::ehealth;
using sactest::fixture;
using sactest::slurp;

namespace {

ClientRequest get(const std::string& path, const std::string& subject, const std::string& purpose) {
  ClientRequest r;
  r.method = "GET";
  r.path = path;
  if (!subject.empty()) r.headers.emplace("x-subject-id", subject);
  if (!purpose.empty()) r.query.emplace("purpose", purpose);
  return r;
}

UpstreamFn echo_upstream(int* hits) {
  return [hits](const ClientRequest& req) -> std::optional<ClientResponse> {
    ++*hits;
    ClientResponse resp;
    resp.body = std::string(sactest::kUpstreamBody) + req.path;
    return resp;
  };
}

}  // namespace

TEST(GatewayHttp, EndToEnd) {
  const auto r = sactest::enforcement_end_to_end();
  EXPECT_TRUE(r.ok) << r.detail;
  EXPECT_GE(r.cases, 9u);
}

TEST(GatewayHttp, SnapshotIsolation) {
  const auto r = sactest::snapshot_isolation(100, 1000);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Gateway, PermitForwardsAndDenyDoesNot) {
  int hits = 0;
  Gateway gw(ehealth(), echo_upstream(&hits), nullptr);
  auto req = get("/contacts/jen", "joan", "treat");
  auto resp = gw.handle_client_request(req);
  EXPECT_EQ(resp.status, 200);
  EXPECT_EQ(resp.body, std::string(sactest::kUpstreamBody) + "/contacts/jen");
  EXPECT_EQ(resp.header("X-Decision"), "Permit");
  EXPECT_EQ(resp.header("X-Store-Version"), "1");

  // the staff contact rule permits, but the refused consent denies at the same priority
  resp = gw.handle_client_request(get("/contacts/bob", "joan", "treat"));
  EXPECT_EQ(resp.status, 403);
  EXPECT_EQ(resp.header("X-Decision"), "Deny");
  resp = gw.handle_client_request(get("/contacts/jen", "joan", "general"));
  EXPECT_EQ(resp.status, 403);  // purpose outside the staff rule
  resp = gw.handle_client_request(get("/info/jen", "acme", "research"));
  EXPECT_EQ(resp.status, 200);
  resp = gw.handle_client_request(get("/info/bob", "acme", "research"));
  EXPECT_EQ(resp.status, 403);
  resp = gw.handle_client_request(get("/records/jen", "harrison", "treat"));
  EXPECT_EQ(resp.status, 403);
  EXPECT_EQ(hits, 2);
}

TEST(Gateway, MaskedResponsesRevealNothing) {
  Gateway gw(ehealth(), nullptr, nullptr);
  auto req = get("/records/jen", "joan", "treat");
  req.headers.emplace("x-subject-attribute",
                      "attributeID=years_of_service;name=years_of_service;soa=hospital_ADMIN;"
                      "valueType=int;value=1");
  const auto resp = gw.handle_client_request(req);
  EXPECT_EQ(resp.status, 403);
  EXPECT_EQ(resp.body, "access denied");
  EXPECT_EQ(resp.header("X-Decision"), "Deny");
}

TEST(Gateway, UpstreamUnreachableIs502) {
  Gateway gw(ehealth(), http_upstream("http://127.0.0.1:1"), nullptr);
  const auto resp = gw.handle_client_request(get("/contacts/jen", "joan", "treat"));
  EXPECT_EQ(resp.status, 502);
  EXPECT_EQ(resp.header("X-Decision"), "Permit");
}

TEST(Gateway, BadRequests) {
  Gateway gw(ehealth(), nullptr, nullptr);
  EXPECT_EQ(gw.handle_client_request(get("/contacts/jen", "", "treat")).status, 400);
  EXPECT_EQ(gw.handle_client_request(get("/contacts/jen", "joan", "")).status, 400);
  EXPECT_EQ(gw.handle_client_request(get("/contacts/jen", "joan", "fun")).status, 400);
  auto req = get("/contacts/jen", "joan", "treat");
  req.headers.emplace("x-subject-attribute", "name=x;value");
  EXPECT_EQ(gw.handle_client_request(req).status, 400);
}

TEST(Gateway, QueryDecision) {
  Gateway gw(ehealth(), nullptr, nullptr);
  const auto resp = gw.query_decision(slurp(fixture("ehealth/requests/01_doctor_5_years.xml")));
  EXPECT_EQ(resp.status, 200);
  EXPECT_EQ(resp.content_type, "application/xml");
  const auto parsed = parse_xacml_response(resp.body);
  EXPECT_EQ(parsed.decision, DecisionValue::Permit);

  const auto bad = gw.query_decision(
      R"(<Request><Subject id="joan"/><Resource id="jen_email"/><Environment/></Request>)");
  EXPECT_EQ(bad.status, 400);
  EXPECT_NE(bad.body.find("MissingCategory"), std::string::npos);
}

TEST(Gateway, EmptyPolicyIsNotApplicable) {
  Gateway gw(ehealth(), nullptr, nullptr);
  gw.admin_load(AdminKind::Policy, std::nullopt, slurp(fixture("broken/empty_policy/policy.xml")));
  const auto resp = gw.query_decision(slurp(fixture("ehealth/requests/01_doctor_5_years.xml")));
  EXPECT_EQ(parse_xacml_response(resp.body).decision, DecisionValue::NotApplicable);
}

TEST(GatewayAdmin, PolicyLoadBumpsVersion) {
  Gateway gw(ehealth(), nullptr, nullptr);
  const auto resp = gw.admin_request("policy", slurp(fixture("ehealth/policy.xml")));
  EXPECT_EQ(resp.status, 200);
  EXPECT_EQ(resp.body, "version 2\n");
  EXPECT_EQ(gw.version(), 2u);
  EXPECT_EQ(gw.admin_request("ontology/AtO", slurp(fixture("ehealth/ato.xml"))).status, 200);
  EXPECT_EQ(gw.admin_request("purposes", slurp(fixture("ehealth/purposes.xml"))).status, 200);
  EXPECT_EQ(gw.admin_request("registry", slurp(fixture("ehealth/registry.xml"))).status, 200);
  EXPECT_EQ(gw.version(), 5u);
}

TEST(GatewayAdmin, InvalidDocumentsKeepTheActiveVersion) {
  Gateway gw(ehealth(), nullptr, nullptr);
  auto resp = gw.admin_request("ontology/SO", slurp(fixture("broken/cyclic_so/so.xml")));
  EXPECT_EQ(resp.status, 422);
  EXPECT_NE(resp.body.find("CycleDetected"), std::string::npos);
  EXPECT_EQ(gw.version(), 1u);

  // a policy that references a concept the SO does not define
  resp = gw.admin_request("policy", R"(<spl:policy><spl:access_Rules>
      <spl:access_Rule Name="x"><Target><Subject name="ghost" ontologyRef="SO"/></Target></spl:access_Rule>
    </spl:access_Rules></spl:policy>)");
  EXPECT_EQ(resp.status, 422);
  EXPECT_EQ(gw.version(), 1u);

  // removing a concept the policy still uses
  resp = gw.admin_request("ontology/SO", R"(<ontology kind="SO"><concept id="person"/></ontology>)");
  EXPECT_EQ(resp.status, 422);
  EXPECT_EQ(gw.version(), 1u);

  EXPECT_EQ(gw.admin_request("frobnicate", "").status, 404);
  EXPECT_EQ(gw.admin_request("ontology/XX", "").status, 404);
  EXPECT_EQ(gw.admin_request("policy", "<oops").status, 422);
}

TEST(GatewayConfig, Parsing) {
  auto kv = parse_key_values(slurp(fixture("ehealth/bundle.conf")));
  kv["listen"] = "127.0.0.1:8088";
  kv["upstream"] = "http://127.0.0.1:9000";
  kv["audit_log"] = "audit.jsonl";
  const auto cfg = parse_gateway_config(kv, "/srv");
  EXPECT_EQ(cfg.listen_host, "127.0.0.1");
  EXPECT_EQ(cfg.listen_port, 8088);
  EXPECT_EQ(cfg.audit_log, std::filesystem::path("/srv/audit.jsonl"));
  EXPECT_EQ(cfg.bundle.policy, std::filesystem::path("/srv/policy.xml"));

  for (const char* bad : {"8088", "host:", "host:x", "host:70000"}) {
    auto copy = kv;
    copy["listen"] = bad;
    EXPECT_THROW((void)parse_gateway_config(copy, "/srv"), Error) << bad;
  }
  for (const char* key : {"listen", "upstream", "audit_log", "policy"}) {
    auto copy = kv;
    copy.erase(key);
    try {
      (void)parse_gateway_config(copy, "/srv");
      ADD_FAILURE() << key;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigError);
      EXPECT_NE(std::string(e.what()).find(std::string("'") + key + "'"), std::string::npos);
    }
  }
}

TEST(GatewayConfig, EnvironmentOverride) {
  ::unsetenv("SACPDP_CONFIG");
  EXPECT_EQ(resolve_config_path("a.conf"), std::filesystem::path("a.conf"));
  ::setenv("SACPDP_CONFIG", "/etc/b.conf", 1);
  EXPECT_EQ(resolve_config_path("a.conf"), std::filesystem::path("/etc/b.conf"));
  ::unsetenv("SACPDP_CONFIG");
}

TEST(GatewayWire, ActionForMethod) {
  EXPECT_EQ(action_for_method("GET"), "read");
  EXPECT_EQ(action_for_method("HEAD"), "read");
  EXPECT_EQ(action_for_method("PUT"), "write");
  EXPECT_EQ(action_for_method("PATCH"), "write");
  EXPECT_EQ(action_for_method("POST"), "create");
  EXPECT_EQ(action_for_method("DELETE"), "delete");
}

TEST(GatewayWire, AttributeHeader) {
  const auto a = parse_attribute_header(
      "attributeID=Auth_doctors; name=doctor; soa=hospital_ADMIN; e=Enabled");
  EXPECT_EQ(a.attribute_id, "Auth_doctors");
  EXPECT_EQ(a.name, "doctor");
  EXPECT_EQ(a.soa_id, "hospital_ADMIN");
  EXPECT_TRUE(a.equivalence_enabled);
  EXPECT_FALSE(a.value);

  const auto b = parse_attribute_header("name=years_of_service;valueType=int;value=7");
  EXPECT_EQ(b.value, Scalar{std::int64_t{7}});
  EXPECT_THROW((void)parse_attribute_header("valueType=int;value=seven;name=y"), Error);
  EXPECT_THROW((void)parse_attribute_header("soa=x"), Error);
}

TEST(Audit, JsonLines) {
  AuditRecord rec;
  rec.timestamp = "2026-01-01T00:00:00.000Z";
  rec.subject_id = "joan";
  rec.decision = DecisionValue::Deny;
  rec.masked = true;
  rec.matched_rule = "secret";
  rec.http_status = 403;
  rec.endpoint = "proxy";
  const auto j = nlohmann::json::parse(to_json_line(rec));
  EXPECT_EQ(j["decision"], "Deny");
  EXPECT_TRUE(j["matched_rule"].is_null());
  EXPECT_EQ(j["http_status"], 403);
  EXPECT_EQ(to_json_line(rec).find('\n'), std::string::npos);

  const auto dir = sactest::temp_dir("audit");
  {
    auto log = std::make_shared<AuditLog>(dir / "audit.jsonl");
    Gateway gw(ehealth(), nullptr, log);
    gw.handle_client_request(get("/records/jen", "mallory", "treat"));
    gw.query_decision("<broken");
    EXPECT_EQ(log->count(), 2u);
  }
  const auto lines = sactest::read_lines(dir / "audit.jsonl");
  ASSERT_EQ(lines.size(), 2u);
  const auto first = nlohmann::json::parse(lines[0]);
  EXPECT_EQ(first["decision"], "NotApplicable");
  EXPECT_EQ(first["endpoint"], "proxy");
  EXPECT_EQ(first["store_version"], 1);
  const auto second = nlohmann::json::parse(lines[1]);
  EXPECT_EQ(second["http_status"], 400);
  EXPECT_EQ(second["error"], "MalformedXml");
  std::filesystem::remove_all(dir);
}
