#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sac/knowledge_base.hpp"
#include "sac/pdp.hpp"

namespace sac {

/// Flat `key = value` file; `#` starts a comment line.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::string_view text);

std::string read_file(const std::filesystem::path& path);  // throws Error(IoError)

/// Set of documents that together make up a policy store.
struct BundlePaths {
  std::filesystem::path so, oo, ao, ato;
  std::filesystem::path purposes;
  std::filesystem::path policy;
  std::filesystem::path registry;
  std::filesystem::path requests;  // optional directory of canned wire requests
  std::set<std::string> trusted_soas;
};

inline constexpr std::string_view kBundleManifest = "bundle.conf";

/// Reads the path keys (`ontology.SO`, ..., `purposes`, `policy`, `registry`,
/// `trusted_soa`, optional `requests`) relative to `base_dir`. Throws
/// Error(ConfigError) naming the first missing key.
BundlePaths bundle_paths_from(const KeyValues& kv, const std::filesystem::path& base_dir);

/// `path` is a manifest file or a directory containing bundle.conf.
BundlePaths read_bundle_manifest(const std::filesystem::path& path);

std::set<std::string> split_list(std::string_view text);

struct LoadedBundle {
  std::shared_ptr<const PolicyStore> store;
  std::shared_ptr<const KnowledgeBase> kb;
};

struct BundleReport {
  std::optional<LoadedBundle> bundle;  // set iff findings is empty
  ValidationReport findings;
};

/// Loads every document and collects all findings instead of stopping at
/// the first. Throws Error(IoError) when a file cannot be read.
BundleReport load_bundle(const BundlePaths& paths, std::uint64_t version = 1);

/// Canned wire requests from `paths.requests`, in file-name order.
std::vector<std::pair<std::string, XacmlRequestDoc>> load_canned_requests(const BundlePaths& paths);

}  // namespace sac
