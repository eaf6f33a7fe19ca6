// sacpdp: offline validation and evaluation, oracle runs, and the gateway.

#include <pthread.h>
#include <signal.h>

#include <cstdint>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>

#include "sac/bundle.hpp"
#include "sac/error.hpp"
#include "sac/gateway.hpp"
#include "sac/oracle.hpp"
#include "sac/parser.hpp"
#include "sac/pdp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitIo = 2;

int exit_code_for(sac::DecisionValue v) {
  switch (v) {
    case sac::DecisionValue::Permit: return 0;
    case sac::DecisionValue::Deny: return 3;
    case sac::DecisionValue::NotApplicable: return 4;
    case sac::DecisionValue::Indeterminate: return 5;
  }
  return 5;
}

// Loads a bundle whose findings are fatal; nullopt after reporting them.
std::optional<sac::LoadedBundle> load_valid(const sac::BundlePaths& paths) {
  auto report = sac::load_bundle(paths);
  if (!report.bundle) {
    std::cerr << sac::format_report(report.findings);
    return std::nullopt;
  }
  return report.bundle;
}

int cmd_validate(const std::string& bundle) {
  try {
    const auto report = sac::load_bundle(sac::read_bundle_manifest(bundle));
    std::cout << sac::format_report(report.findings);
    std::cout << report.findings.size() << " finding(s)\n";
    return report.findings.empty() ? kExitOk : kExitFindings;
  } catch (const sac::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
}

int cmd_decide(const std::string& bundle, const std::string& request, bool with_explanation) {
  try {
    const auto paths = sac::read_bundle_manifest(bundle);
    const auto doc = sac::parse_xacml_request(sac::read_file(request));
    const auto loaded = load_valid(paths);
    if (!loaded) return kExitIo;
    const auto enriched = sac::enrich(doc, *loaded->kb, loaded->store->trusted_soas());
    for (const auto& note : enriched.conflicts) std::cerr << "note: " << note << "\n";
    const auto d = sac::decide(*loaded->store, enriched.request);
    std::cout << sac::to_string(d.value) << "\n";
    if (with_explanation) std::cout << sac::explain(d) << "\n";
    return exit_code_for(d.value);
  } catch (const sac::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
}

int cmd_oracle(const std::string& bundle, std::size_t random, std::uint64_t seed,
               sac::CombiningOrder order) {
  try {
    const auto paths = sac::read_bundle_manifest(bundle);
    const auto loaded = load_valid(paths);
    if (!loaded) return kExitIo;
    const auto canned = sac::load_canned_requests(paths);
    sac::DecideFn engine = [order](const sac::PolicyStore& s, const sac::AccessRequest& r) {
      return sac::decide(s, r, sac::DecideOptions{order});
    };
    const auto report = sac::run_oracle_suite(*loaded, canned, random, seed, engine);
    std::cout << report.text;
    return report.mismatches == 0 ? kExitOk : kExitFindings;
  } catch (const sac::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
}

int cmd_serve(const std::string& config_arg) {
  // Signals go to the waiter thread only.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  sac::GatewayConfig cfg;
  std::optional<sac::LoadedBundle> loaded;
  std::shared_ptr<sac::AuditLog> audit;
  try {
    cfg = sac::load_gateway_config(sac::resolve_config_path(config_arg));
    loaded = load_valid(cfg.bundle);
    if (!loaded) return kExitIo;
    audit = std::make_shared<sac::AuditLog>(cfg.audit_log);
  } catch (const sac::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }

  sac::Gateway gateway(*loaded, sac::http_upstream(cfg.upstream), audit);
  httplib::Server server;
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  sac::install_routes(server, gateway);

  int port = cfg.listen_port;
  if (port == 0) {
    port = server.bind_to_any_port(cfg.listen_host);
    if (port < 0) port = 0;
  } else if (!server.bind_to_port(cfg.listen_host, port)) {
    port = 0;
  }
  if (port == 0) {
    std::cerr << "cannot listen on " << cfg.listen_host << ":" << cfg.listen_port
              << ": address in use or unavailable\n";
    return kExitIo;
  }
  std::cerr << "listening on " << cfg.listen_host << ":" << port << "\n";

  std::thread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen_after_bind();
  audit->flush();
  // listen_after_bind can also return on its own; wake the waiter in that case.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cerr << "stopped; " << audit->count() << " request(s) audited\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic access control decision point"};
  app.require_subcommand(1);

  std::string bundle, request, config;
  bool with_explanation = false;
  std::size_t random = 0;
  std::uint64_t seed = 42;
  std::string order_name = "deny-permit-indeterminate";

  auto* validate = app.add_subcommand("validate", "Load and validate a bundle");
  validate->add_option("bundle", bundle, "bundle directory or bundle.conf")->required();

  auto* decide = app.add_subcommand("decide", "Evaluate one wire request");
  decide->add_option("bundle", bundle, "bundle directory or bundle.conf")->required();
  decide->add_option("request", request, "request document")->required();
  decide->add_flag("--explain", with_explanation, "print the decision explanation");

  auto* oracle = app.add_subcommand("oracle", "Compare the engine with the reference evaluator");
  oracle->add_option("bundle", bundle, "bundle directory or bundle.conf")->required();
  oracle->add_option("--random", random, "number of random requests");
  oracle->add_option("--seed", seed, "random seed");
  oracle->add_option("--combining", order_name, "combining order of the engine under test")
      ->check(CLI::IsMember({"deny-permit-indeterminate", "permit-deny-indeterminate",
                             "deny-indeterminate-permit"}));

  auto* serve = app.add_subcommand("serve", "Run the enforcement gateway");
  serve->add_option("config", config, "gateway config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitIo;
  }

  if (*validate) return cmd_validate(bundle);
  if (*decide) return cmd_decide(bundle, request, with_explanation);
  if (*oracle) {
    auto order = sac::CombiningOrder::DenyPermitIndeterminate;
    if (order_name == "permit-deny-indeterminate") order = sac::CombiningOrder::PermitDenyIndeterminate;
    if (order_name == "deny-indeterminate-permit") order = sac::CombiningOrder::DenyIndeterminatePermit;
    return cmd_oracle(bundle, random, seed, order);
  }
  return cmd_serve(config);
}
