#pragma once

#include <iosfwd>
#include <string>

#include "stepmap/config.hpp"

namespace stepmap {

// Process exit codes shared by every subcommand.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitPartialFailure = 3;

// Artifact names, relative to the configured output directory.
namespace artifacts {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kParamGrid = "param_grid.csv";
inline constexpr const char* kBoTrace = "bo_trace.csv";
inline constexpr const char* kTimings = "timings.csv";
inline constexpr const char* kSwingTime = "swing_time.csv";
inline constexpr const char* kMaps = "maps.csv";
inline constexpr const char* kSafeRegion = "safe_region.json";
inline constexpr const char* kSelector = "step_selector.json";
inline constexpr const char* kLipmCompare = "lipm_compare.csv";
}  // namespace artifacts

struct ValidateOptions {
  std::string mode = "reach";  // "reach" or "step-select"
  int n = 1000;
};

struct RenderOptions {
  std::string what = "torque";  // reach | torque | near-opt | safe-region | swing-time
  double delta = 0.05;          // near-optimal fraction for --what near-opt
};

// Each command validates its inputs (manifest hashes included), computes,
// writes artifacts plus an updated manifest, and returns an exit code.
// Contract violations surface as exceptions; the CLI maps them to
// kExitValidation.
int cmd_optimize(const PipelineConfig& config, std::ostream& log);
int cmd_map(const PipelineConfig& config, std::ostream& log);
int cmd_fit(const PipelineConfig& config, std::ostream& log);
int cmd_query(const PipelineConfig& config, double xdot0, std::ostream& log);
int cmd_validate(const PipelineConfig& config, const ValidateOptions& options,
                 std::ostream& log);
int cmd_render(const PipelineConfig& config, const RenderOptions& options, std::ostream& log);
int cmd_lipm_compare(const PipelineConfig& config, std::ostream& log);

}  // namespace stepmap
