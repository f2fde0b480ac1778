#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "stepmap/bayesopt.hpp"
#include "stepmap/episode.hpp"

namespace stepmap {

// Regular (velocity, position) grid of optimized gait parameters; row-major
// with the velocity axis outermost.
struct ParamGrid {
  std::vector<double> velocities;
  std::vector<double> positions;
  std::vector<GaitParams> params;
  std::vector<double> best_j;

  int index(int iv, int jp) const { return iv * static_cast<int>(positions.size()) + jp; }
  const GaitParams& at(int iv, int jp) const {
    return params[static_cast<size_t>(index(iv, jp))];
  }
  void validate() const;  // throws std::invalid_argument
};

std::vector<double> linspace(double lo, double hi, int n);

// Element-wise bilinear interpolation over the enclosing cell; exact at nodes.
// Throws std::out_of_range outside the grid bounding box (no extrapolation).
GaitParams query_params(const ParamGrid& grid, const InitialCondition& ic);

// Per-node wall-clock and early-termination accounting for the timing report.
struct NodeReport {
  int iv = 0, jp = 0;
  double xdot0 = 0.0, s_des = 0.0;
  double best_j = 0.0;
  double wall_ms = 0.0;
  int early_terminations = 0;
};

using GridObjective = std::function<EvalResult(const InitialCondition&, const GaitParams&)>;

// Runs optimize_pair on every node across a worker pool. Node seeds derive
// from (master seed, node row, node column), so results are identical for any
// worker count. Per-node failures throw JobError carrying the node index,
// unless `failed_nodes` is given, in which case failing node indices are
// collected there and the nodes keep default parameters with best_j = NaN.
ParamGrid build_param_grid(const std::vector<double>& velocities,
                           const std::vector<double>& positions, const BoBudget& budget,
                           const ParamBounds& bounds, const GridObjective& objective,
                           int workers, std::vector<NodeReport>* reports = nullptr,
                           std::vector<std::vector<BoStep>>* traces = nullptr,
                           std::vector<int>* failed_nodes = nullptr);

void write_param_grid_csv(const std::filesystem::path& path, const ParamGrid& grid);
ParamGrid read_param_grid_csv(const std::filesystem::path& path);

}  // namespace stepmap
