#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace stepmap {

// FNV-1a 64-bit hash, used for config and artifact fingerprints.
uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);
std::string hash_file(const std::filesystem::path& path);

struct ManifestPhase {
  uint64_t seed = 0;
  std::map<std::string, std::string> files;  // out_dir-relative path -> hash
  std::vector<double> node_wall_ms;          // per-node wall time where applicable
  std::vector<int> failed_nodes;             // node indices that raised
};

// Run log tying artifacts to the configuration that produced them. Every
// listed file must exist under the output directory with a matching hash.
struct RunManifest {
  std::string config_hash;
  std::map<std::string, ManifestPhase> phases;

  // Hashes out_dir/rel and records it under the named phase.
  void record_file(const std::string& phase, const std::filesystem::path& out_dir,
                   const std::string& rel);
  // True when any phase lists `rel`.
  bool has_file(const std::string& rel) const;
  // Recomputes the hash of out_dir/rel and throws std::runtime_error if the
  // file is missing, unlisted, or was modified since it was recorded.
  void verify_file(const std::filesystem::path& out_dir, const std::string& rel) const;
  // Verifies every listed file.
  void verify_all(const std::filesystem::path& out_dir) const;

  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);
};

}  // namespace stepmap
