#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "stepmap/maps.hpp"

namespace stepmap {

struct ResidualStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// The energy-optimal step selector: a degree-4 polynomial fit of
// (velocity -> per-column torque-argmin position). Coefficients are stored
// for the scaled variable u = 2(v - vmin)/(vmax - vmin) - 1; evaluation is
// clamped to the position axis range of the training map.
struct StepSelector {
  std::array<double, 5> coeffs{};  // c0 + c1 u + ... + c4 u^4
  std::array<double, 2> velocity_range{0.0, 0.0};
  std::array<double, 2> position_range{0.0, 0.0};
  ResidualStats residuals;  // statistics of |fit - argmin| over the samples
  std::vector<double> train_velocities;
  std::vector<double> train_argmin;

  void validate() const;
};

StepSelector fit_step_selector(const TorqueMap& tmap);

// Evaluates the selector; throws std::out_of_range outside the velocity range.
double select_step(const StepSelector& sel, double xdot0);

void save_step_selector(const std::filesystem::path& path, const StepSelector& sel);
StepSelector load_step_selector(const std::filesystem::path& path);

}  // namespace stepmap
