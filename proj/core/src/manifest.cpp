#include "stepmap/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stepmap {

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream body;
  body << in.rdbuf();
  return fnv1a64_hex(body.str());
}

void RunManifest::record_file(const std::string& phase, const std::filesystem::path& out_dir,
                              const std::string& rel) {
  phases[phase].files[rel] = hash_file(out_dir / rel);
}

bool RunManifest::has_file(const std::string& rel) const {
  for (const auto& [name, phase] : phases)
    if (phase.files.count(rel)) return true;
  return false;
}

void RunManifest::verify_file(const std::filesystem::path& out_dir, const std::string& rel) const {
  const std::string* recorded = nullptr;
  for (const auto& [name, phase] : phases) {
    auto it = phase.files.find(rel);
    if (it != phase.files.end()) recorded = &it->second;
  }
  if (!recorded) throw std::runtime_error("manifest does not list " + rel);
  const std::string actual = hash_file(out_dir / rel);
  if (actual != *recorded)
    throw std::runtime_error("manifest hash mismatch for " + rel +
                             " (file was modified after it was recorded)");
}

void RunManifest::verify_all(const std::filesystem::path& out_dir) const {
  for (const auto& [name, phase] : phases)
    for (const auto& [rel, hash] : phase.files) verify_file(out_dir, rel);
}

void RunManifest::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  nlohmann::json jp = nlohmann::json::object();
  for (const auto& [name, phase] : phases) {
    nlohmann::json f = nlohmann::json::object();
    for (const auto& [rel, hash] : phase.files) f[rel] = hash;
    jp[name] = {{"seed", phase.seed},
                {"files", f},
                {"node_wall_ms", phase.node_wall_ms},
                {"failed_nodes", phase.failed_nodes}};
  }
  j["phases"] = jp;
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  nlohmann::json j;
  in >> j;
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& [name, jp] : j.at("phases").items()) {
    ManifestPhase phase;
    phase.seed = jp.at("seed").get<uint64_t>();
    for (const auto& [rel, hash] : jp.at("files").items())
      phase.files[rel] = hash.get<std::string>();
    phase.node_wall_ms = jp.at("node_wall_ms").get<std::vector<double>>();
    phase.failed_nodes = jp.at("failed_nodes").get<std::vector<int>>();
    m.phases[name] = phase;
  }
  return m;
}

}  // namespace stepmap
