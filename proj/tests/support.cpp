#include "support.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

#include "sac/oracle.hpp"
#include "sac/parser.hpp"

namespace sactest {

namespace fs = std::filesystem;

fs::path fixture(const std::string& relative) { return fs::path(SAC_FIXTURES) / relative; }

std::string slurp(const fs::path& path) { return sac::read_file(path); }

sac::BundlePaths ehealth_paths() { return sac::read_bundle_manifest(fixture("ehealth")); }

const sac::LoadedBundle& ehealth() {
  static const sac::LoadedBundle bundle = [] {
    auto report = sac::load_bundle(ehealth_paths());
    if (!report.bundle) throw std::runtime_error(sac::format_report(report.findings));
    return *report.bundle;
  }();
  return bundle;
}

sac::AccessRequest ehealth_request(const std::string& file) {
  const auto doc = sac::parse_xacml_request(slurp(fixture("ehealth/requests/" + file)));
  return sac::enrich(doc, *ehealth().kb, ehealth().store->trusted_soas()).request;
}

sac::XacmlRequestDoc wire_request(const std::string& subject, const std::string& resource,
                                  const std::string& action, const std::string& purpose) {
  sac::XacmlRequestDoc doc;
  doc.subject_id = subject;
  doc.resource_id = resource;
  doc.action_id = action;
  doc.purpose = purpose;
  return doc;
}

sac::Decision decide_wire(const sac::XacmlRequestDoc& doc) {
  const auto& b = ehealth();
  return sac::decide(*b.store, sac::enrich(doc, *b.kb, b.store->trusted_soas()).request);
}

sac::Decision oracle_wire(const sac::XacmlRequestDoc& doc) {
  const auto& b = ehealth();
  return sac::oracle_decide(*b.store, sac::enrich(doc, *b.kb, b.store->trusted_soas()).request);
}

std::map<std::string, std::set<std::string>> reachability(const sac::OntologyGraph& g) {
  const std::string top(sac::kTopConcept);
  std::map<std::string, std::vector<std::string>> up;
  for (const auto& [child, parent] : g.isa_edges()) {
    up[child].push_back(parent == g.top_alias() ? top : parent);
  }
  std::map<std::string, std::set<std::string>> out;
  std::vector<std::string> ids{top};
  for (const auto& [id, kind] : g.nodes()) ids.push_back(id);
  for (const auto& id : ids) {
    auto& seen = out[id];
    std::vector<std::string> stack{id};
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) continue;
      for (const auto& p : up[cur]) stack.push_back(p);
    }
    seen.insert(top);
  }
  return out;
}

sac::OntologyBuilder builder_from(const sac::OntologyGraph& g) {
  sac::OntologyBuilder b(g.kind());
  if (!g.top_alias().empty()) b.top_alias(g.top_alias());
  for (const auto& [id, kind] : g.nodes()) {
    if (kind == sac::NodeKind::Concept) {
      b.concept_node(id);
    } else {
      b.individual(id);
    }
  }
  for (const auto& [c, p] : g.isa_edges()) b.isa(c, p);
  for (const auto& [j, s] : g.inherit_edges()) b.inherits(j, s);
  for (const auto& [x, y] : g.equiv_edges()) b.equiv(x, y);
  for (const auto& arc : g.arcs()) b.arc(arc.from, arc.label, arc.to);
  return b;
}

sac::PolicyStore with_policy(const sac::PolicyStore& store, sac::PolicyDocument policy) {
  return sac::PolicyStore::activate(std::move(policy), store.ontologies(), store.purposes(),
                                    store.trusted_soas(), store.version());
}

sac::PolicyStore with_so(const sac::PolicyStore& store, const sac::OntologyGraph& so) {
  auto set = store.ontologies();
  set.so = std::make_shared<const sac::OntologyGraph>(so);
  return sac::PolicyStore::activate(store.policy(), std::move(set), store.purposes(),
                                    store.trusted_soas(), store.version());
}

sac::PolicyStore store_with_rules(std::vector<sac::AccessRule> rules) {
  sac::PolicyDocument doc = ehealth().store->policy();
  doc.rules = std::move(rules);
  return with_policy(*ehealth().store, std::move(doc));
}

StubUpstream::StubUpstream() : server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ++hits_;
    res.set_content(std::string(kUpstreamBody) + req.path, "text/plain");
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
  server_->Put(".*", handler);
  server_->Delete(".*", handler);
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

StubUpstream::~StubUpstream() {
  server_->stop();
  thread_.join();
}

std::string StubUpstream::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

fs::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = fs::temp_directory_path() / ("sac_" + tag + "_" + std::to_string(rng() % 1000000000));
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args, const std::string& env) {
  const auto dir = temp_dir("cli");
  const auto out = dir / "out.txt";
  const auto err = dir / "err.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + SAC_CLI + std::string(" ") + args +
                          " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  fs::remove_all(dir);
  return r;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace sactest
