#include <gtest/gtest.h>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <httplib.h>
#include <regex>

#include "support.hpp"

using sactest::fixture;
using sactest::run_cli;

namespace {

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

/// A `sacpdp serve` child with stderr captured through a pipe.
class ServeProcess {
 public:
  explicit ServeProcess(const std::filesystem::path& config) {
    int fds[2];
    if (::pipe(fds) != 0) return;
    pid_ = ::fork();
    if (pid_ == 0) {
      ::dup2(fds[1], 2);
      ::close(fds[0]);
      ::close(fds[1]);
      ::execl(SAC_CLI, SAC_CLI, "serve", config.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(fds[1]);
    err_fd_ = fds[0];
  }

  ~ServeProcess() {
    if (pid_ > 0 && !exited_) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
    if (err_fd_ >= 0) ::close(err_fd_);
  }

  /// Reads stderr until the listening line appears or `limit` passes.
  std::optional<int> wait_listening(std::chrono::milliseconds limit) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    ::fcntl(err_fd_, F_SETFL, O_NONBLOCK);
    const std::regex re("listening on [^:]+:([0-9]+)");
    while (std::chrono::steady_clock::now() < deadline) {
      char buf[256];
      const auto n = ::read(err_fd_, buf, sizeof buf);
      if (n > 0) err_.append(buf, static_cast<std::size_t>(n));
      std::smatch m;
      if (std::regex_search(err_, m, re)) return std::stoi(m[1]);
      if (n == 0) return std::nullopt;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return std::nullopt;
  }

  int terminate() {
    ::kill(pid_, SIGTERM);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    exited_ = true;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  const std::string& err() const { return err_; }

 private:
  pid_t pid_ = -1;
  int err_fd_ = -1;
  bool exited_ = false;
  std::string err_;
};

std::filesystem::path write_config(const std::filesystem::path& dir, const std::string& listen,
                                   bool with_policy = true) {
  std::ofstream out(dir / "gateway.conf");
  const auto eh = fixture("ehealth");
  out << "listen = " << listen << "\n"
      << "upstream = http://127.0.0.1:1\n"
      << "audit_log = audit.jsonl\n"
      << "ontology.SO = " << (eh / "so.xml").string() << "\n"
      << "ontology.OO = " << (eh / "oo.xml").string() << "\n"
      << "ontology.AO = " << (eh / "ao.xml").string() << "\n"
      << "ontology.AtO = " << (eh / "ato.xml").string() << "\n"
      << "purposes = " << (eh / "purposes.xml").string() << "\n"
      << "registry = " << (eh / "registry.xml").string() << "\n"
      << "trusted_soa = hospital_ADMIN, clinic_ADMIN\n";
  if (with_policy) out << "policy = " << (eh / "policy.xml").string() << "\n";
  return dir / "gateway.conf";
}

}  // namespace

TEST(CliValidate, ExitCodes) {
  auto r = run_cli("validate " + q(fixture("ehealth")));
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("0 finding(s)"), std::string::npos);

  r = run_cli("validate " + q(fixture("broken/cyclic_so")));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("CycleDetected so.xml:2:1"), std::string::npos) << r.out;

  r = run_cli("validate " + q(fixture("broken/missing_policy")));
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());

  EXPECT_EQ(run_cli("validate " + q(fixture("broken/empty_policy"))).code, 0);
  EXPECT_EQ(run_cli("validate").code, 2);
  EXPECT_EQ(run_cli("bogus").code, 2);
}

TEST(CliDecide, ExitCodesFollowTheDecision) {
  const auto reqs = fixture("ehealth/requests");
  auto r = run_cli("decide " + q(fixture("ehealth")) + " " + q(reqs / "01_doctor_5_years.xml"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "Permit\n");

  r = run_cli("decide " + q(fixture("ehealth")) + " " + q(reqs / "02_doctor_2_years.xml") +
              " --explain");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.out, "Deny\naccess denied\n");

  r = run_cli("decide " + q(fixture("ehealth")) + " " + q(reqs / "03_doctor_missing_years.xml"));
  EXPECT_EQ(r.code, 5);
  r = run_cli("decide " + q(fixture("ehealth")) + " " + q(reqs / "04_unregistered_subject.xml"));
  EXPECT_EQ(r.code, 4);
  r = run_cli("decide " + q(fixture("broken/empty_policy")) + " " +
              q(reqs / "01_doctor_5_years.xml"));
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(r.out, "NotApplicable\n");

  r = run_cli("decide " + q(fixture("ehealth")) + " " + q(reqs / "01_doctor_5_years.xml") +
              " --explain");
  EXPECT_NE(r.out.find("store version 1"), std::string::npos);
  EXPECT_NE(r.out.find("Read_patient_records"), std::string::npos);

  EXPECT_EQ(run_cli("decide " + q(fixture("ehealth")) + " /nonexistent.xml").code, 2);
  EXPECT_EQ(run_cli("decide " + q(fixture("broken/cyclic_so")) + " " +
                    q(reqs / "01_doctor_5_years.xml"))
                .code,
            2);
}

TEST(CliOracle, ReproducibleAndClean) {
  const auto args = "oracle " + q(fixture("ehealth")) + " --random 500 --seed 42";
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  EXPECT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("seed=42 canned=4 random=500\n", 0), 0u) << a.out;
  EXPECT_NE(a.out.find("mismatches=0\n"), std::string::npos);

  const auto none = run_cli("oracle " + q(fixture("ehealth")) + " --random 0 --seed 1");
  EXPECT_EQ(none.code, 0);
}

TEST(CliOracle, DetectsAWrongCombiningOrder) {
  const auto r = run_cli("oracle " + q(fixture("ehealth")) +
                         " --random 500 --seed 42 --combining permit-deny-indeterminate");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("mismatch "), std::string::npos);
  EXPECT_EQ(run_cli("oracle " + q(fixture("ehealth")) + " --combining sideways").code, 2);
}

TEST(CliServe, HealthzAndShutdown) {
  const auto dir = sactest::temp_dir("serve");
  ServeProcess proc(write_config(dir, "127.0.0.1:0"));
  const auto start = std::chrono::steady_clock::now();
  const auto port = proc.wait_listening(std::chrono::seconds(5));
  ASSERT_TRUE(port) << proc.err();
  httplib::Client client("127.0.0.1", *port);
  const auto health = client.Get("/healthz");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_LT(elapsed, std::chrono::seconds(2));

  const auto version = client.Get("/admin/version");
  ASSERT_TRUE(version);
  EXPECT_EQ(version->body, "1\n");

  httplib::Headers headers = {{"X-Subject-Id", "mallory"}};
  const auto denied = client.Get("/proxy/records/jen?purpose=treat", headers);
  ASSERT_TRUE(denied);
  EXPECT_EQ(denied->status, 403);

  EXPECT_EQ(proc.terminate(), 0);
  EXPECT_EQ(sactest::read_lines(dir / "audit.jsonl").size(), 1u);
  std::filesystem::remove_all(dir);
}

TEST(CliServe, AddressInUse) {
  httplib::Server blocker;
  const int port = blocker.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  const auto dir = sactest::temp_dir("serve_busy");
  const auto r = run_cli("serve " + q(write_config(dir, "127.0.0.1:" + std::to_string(port))));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cannot listen"), std::string::npos) << r.err;
  std::filesystem::remove_all(dir);
}

TEST(CliServe, ConfigErrors) {
  const auto dir = sactest::temp_dir("serve_cfg");
  auto r = run_cli("serve " + q(write_config(dir, "127.0.0.1:0", false)));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'policy'"), std::string::npos) << r.err;

  r = run_cli("serve " + q(dir / "absent.conf"));
  EXPECT_EQ(r.code, 2);

  // the environment variable wins over the argument
  const auto good = write_config(dir, "127.0.0.1:x");
  r = run_cli("serve /nonexistent.conf", "SACPDP_CONFIG=" + q(good));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'listen'"), std::string::npos) << r.err;
  std::filesystem::remove_all(dir);
}
