#pragma once

#include <vector>

#include "stepmap/maps.hpp"
#include "stepmap/param_grid.hpp"
#include "stepmap/selector.hpp"

namespace stepmap {

// Instantaneous capture point of a linear inverted pendulum started at
// x = 0 with velocity xdot0, evaluated after a swing time of t_sw.
double lipm_predict_step(double xdot0, double z_nom, double t_sw, double gravity = 9.81);

enum class LipmStatus { kCompared = 0, kOutOfBounds = 1, kUnreachable = 2 };

struct LipmRow {
  double xdot0 = 0.0;
  double s_opt = 0.0;   // per-column torque-argmin position
  double s_lipm = 0.0;  // LIPM-predicted step position
  double t_sw = 0.0;    // swing duration used for the prediction
  double j_opt = 0.0;
  double j_lipm = 0.0;  // NaN unless status == kCompared
  double abs_err = 0.0;
  LipmStatus status = LipmStatus::kCompared;
};

struct LipmComparison {
  std::vector<LipmRow> rows;
  int n_compared = 0;
  int n_out_of_bounds = 0;
  int n_unreachable = 0;
  ResidualStats error;  // |J_tau(lipm cell) - J_tau(optimal cell)| statistics
};

// Compares the torque of the LIPM-predicted step cell against the optimal
// cell for every velocity column. The swing duration is queried from the
// gait-parameter grid (t_swing_start + s / s_speed) starting at the optimal
// column and fixed-point iterated twice at the predicted positions.
LipmComparison compare_lipm(const TorqueMap& tmap, const StepSelector& sel,
                            const ParamGrid& grid, double z_nom, double gravity = 9.81);

}  // namespace stepmap
