#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stepmap/bayesopt.hpp"
#include "stepmap/episode.hpp"
#include "stepmap/svm.hpp"

namespace stepmap {

// A uniformly spaced axis specification (inclusive endpoints).
struct AxisSpec {
  int count = 2;
  double lo = 0.0;
  double hi = 1.0;

  std::vector<double> values() const;
  void validate(const char* name) const;
};

// The single source of configuration for the whole pipeline. Defaults
// reproduce the published constants; JSON files override individual keys and
// unknown keys are rejected.
struct PipelineConfig {
  EpisodeConfig episode;                     // biped, gains, swing, weights
  ParamBounds bounds;                        // gait-parameter search box
  AxisSpec phase1_velocity{15, 0.1, 0.5};    // optimization grid axes
  AxisSpec phase1_position{10, 0.1, 0.8};
  AxisSpec phase2_velocity{40, 0.1, 0.5};    // dense map axes
  AxisSpec phase2_position{20, 0.1, 0.8};
  BoBudget budget{100, 70, 0};               // seed is overwritten by `seed`
  SvmHyperparams svm;
  uint64_t seed = 2024;
  int workers = 0;                           // 0 = hardware concurrency
  std::string out_dir = "out";

  void validate() const;

  // The BO budget with the master seed applied.
  BoBudget seeded_budget() const {
    BoBudget b = budget;
    b.seed = seed;
    return b;
  }

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& path) const;
  static PipelineConfig load(const std::filesystem::path& path);

  // FNV-1a hash of the canonical (sorted-key) JSON dump, as fixed-width hex.
  std::string hash() const;
};

}  // namespace stepmap
