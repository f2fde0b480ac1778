#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "stepmap/param_grid.hpp"

namespace stepmap {

// Dense binary reachability over (velocity, position); row-major with the
// velocity axis outermost.
struct ReachMap {
  std::vector<double> velocities;
  std::vector<double> positions;
  std::vector<uint8_t> reachable;

  int index(int iv, int jp) const { return iv * static_cast<int>(positions.size()) + jp; }
  bool at(int iv, int jp) const { return reachable[static_cast<size_t>(index(iv, jp))] != 0; }
  void validate() const;
};

// Same axes annotated with the swing-phase torque integral; present exactly
// where the reach map succeeded.
struct TorqueMap {
  std::vector<double> velocities;
  std::vector<double> positions;
  std::vector<double> j_tau;
  std::vector<uint8_t> present;

  int index(int iv, int jp) const { return iv * static_cast<int>(positions.size()) + jp; }
  void validate() const;
};

struct MapCellResult {
  bool success = false;
  double j_tau = 0.0;
  bool early_termination = false;
};

using MapObjective = std::function<MapCellResult(const InitialCondition&, const GaitParams&)>;

// Runs one episode per cell with grid-interpolated parameters. Deterministic
// and independent of the worker count. Axes must lie inside the grid box.
std::pair<ReachMap, TorqueMap> build_dense_maps(const ParamGrid& grid,
                                                const std::vector<double>& velocities,
                                                const std::vector<double>& positions,
                                                const MapObjective& episode, int workers);

// Cells within (1 + delta) of their column's minimum torque; delta may be
// infinity (all reachable cells).
std::vector<uint8_t> near_optimal_regions(const TorqueMap& tmap, double delta);

// Combined serialization: one row per cell with columns xdot0, s_des,
// reachable, j_tau (NaN for unreachable cells).
void write_maps_csv(const std::filesystem::path& path, const ReachMap& rmap,
                    const TorqueMap& tmap);
std::pair<ReachMap, TorqueMap> read_maps_csv(const std::filesystem::path& path);

}  // namespace stepmap
