#include "sac/bundle.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sac/error.hpp"
#include "sac/parser.hpp"

namespace sac {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ConfigError, "expected key=value", SourceLocation{line_no, 1});
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::ConfigError, "empty key", SourceLocation{line_no, 1});
    }
    kv.insert_or_assign(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return kv;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> split_list(std::string_view text) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    auto item = trim(text.substr(pos, end - pos));
    if (!item.empty()) out.emplace(item);
    pos = end + 1;
  }
  return out;
}

BundlePaths bundle_paths_from(const KeyValues& kv, const fs::path& base_dir) {
  auto path_of = [&](std::string_view key) {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) {
      throw Error(ErrorCode::ConfigError, "missing key '" + std::string(key) + "'");
    }
    fs::path p(it->second);
    return p.is_absolute() ? p : base_dir / p;
  };
  BundlePaths paths;
  paths.so = path_of("ontology.SO");
  paths.oo = path_of("ontology.OO");
  paths.ao = path_of("ontology.AO");
  paths.ato = path_of("ontology.AtO");
  paths.purposes = path_of("purposes");
  paths.policy = path_of("policy");
  paths.registry = path_of("registry");
  if (auto it = kv.find("requests"); it != kv.end() && !it->second.empty()) {
    paths.requests = path_of("requests");
  }
  if (auto it = kv.find("trusted_soa"); it != kv.end()) {
    paths.trusted_soas = split_list(it->second);
  }
  return paths;
}

BundlePaths read_bundle_manifest(const fs::path& path) {
  const fs::path manifest = fs::is_directory(path) ? path / kBundleManifest : path;
  const auto kv = parse_key_values(read_file(manifest));
  return bundle_paths_from(kv, manifest.parent_path());
}

BundleReport load_bundle(const BundlePaths& paths, std::uint64_t version) {
  // Read everything first so an I/O failure is reported as such.
  const auto so_text = read_file(paths.so);
  const auto oo_text = read_file(paths.oo);
  const auto ao_text = read_file(paths.ao);
  const auto ato_text = read_file(paths.ato);
  const auto purposes_text = read_file(paths.purposes);
  const auto policy_text = read_file(paths.policy);
  const auto registry_text = read_file(paths.registry);

  BundleReport report;
  auto record = [&](const fs::path& file, const Error& e) {
    std::string where = file.filename().string();
    if (e.location()) {
      where += ":" + std::to_string(e.location()->line) + ":" + std::to_string(e.location()->column);
    }
    report.findings.push_back({e.code(), where, e.detail()});
  };

  OntologySet ontologies;
  const std::pair<OntologyKind, std::pair<const fs::path*, const std::string*>> docs[] = {
      {OntologyKind::SO, {&paths.so, &so_text}},
      {OntologyKind::OO, {&paths.oo, &oo_text}},
      {OntologyKind::AO, {&paths.ao, &ao_text}},
      {OntologyKind::AtO, {&paths.ato, &ato_text}},
  };
  for (const auto& [kind, doc] : docs) {
    try {
      ontologies.slot(kind) = std::make_shared<const OntologyGraph>(load_ontology(*doc.second, kind));
    } catch (const Error& e) {
      record(*doc.first, e);
    }
  }
  std::optional<PurposeTree> purposes;
  try {
    purposes = parse_purpose_tree(purposes_text);
  } catch (const Error& e) {
    record(paths.purposes, e);
  }
  std::optional<PolicyDocument> policy;
  try {
    policy = parse_spl_policy(policy_text);
  } catch (const Error& e) {
    record(paths.policy, e);
  }
  std::optional<KnowledgeBase> kb;
  try {
    kb = parse_registry(registry_text);
  } catch (const Error& e) {
    record(paths.registry, e);
  }

  if (ontologies.complete() && purposes && policy) {
    for (auto& f : PolicyStore::validate(*policy, ontologies, *purposes)) {
      f.path = paths.policy.filename().string() + ":" + f.path;
      report.findings.push_back(std::move(f));
    }
  }
  if (ontologies.complete() && kb) {
    for (auto& f : validate_registry(*kb, ontologies)) {
      f.path = paths.registry.filename().string() + ":" + f.path;
      report.findings.push_back(std::move(f));
    }
  }
  if (report.findings.empty()) {
    auto store = PolicyStore::activate(std::move(*policy), std::move(ontologies),
                                       std::move(*purposes), paths.trusted_soas, version);
    report.bundle = LoadedBundle{std::make_shared<const PolicyStore>(std::move(store)),
                                 std::make_shared<const KnowledgeBase>(std::move(*kb))};
  }
  return report;
}

std::vector<std::pair<std::string, XacmlRequestDoc>> load_canned_requests(const BundlePaths& paths) {
  std::vector<std::pair<std::string, XacmlRequestDoc>> out;
  if (paths.requests.empty()) return out;
  if (!fs::is_directory(paths.requests)) {
    throw Error(ErrorCode::IoError, "request directory " + paths.requests.string() + " not found");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(paths.requests)) {
    if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    out.emplace_back(f.filename().string(), parse_xacml_request(read_file(f)));
  }
  return out;
}

}  // namespace sac
