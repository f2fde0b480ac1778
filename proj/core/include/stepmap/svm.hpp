#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "stepmap/episode.hpp"
#include "stepmap/maps.hpp"

namespace stepmap {

// Hyperparameters for the weighted soft-margin RBF SVM that trims the
// reachable region. gamma <= 0 selects the median heuristic on the
// standardized training inputs.
struct SvmHyperparams {
  double c_base = 10.0;
  double weight_reachable = 1.0;
  double weight_unreachable = 14.0;
  double gamma = 0.0;
  double tol = 1e-3;
  int max_passes = 200000;

  void validate() const;
};

// Trained safe-region classifier. Support vectors are stored in
// standardized coordinates; queries are standardized with the recorded
// per-axis mean/stddev before the kernel is evaluated.
struct SafeRegionModel {
  std::vector<std::array<double, 2>> support_x;
  std::vector<double> alpha;   // dual coefficient of each support vector, > 0
  std::vector<int> label;      // +1 reachable, -1 unreachable
  double bias = 0.0;
  double gamma = 1.0;
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> stddev{1.0, 1.0};
  SvmHyperparams hyperparams;
  std::array<double, 2> velocity_range{0.0, 0.0};
  std::array<double, 2> position_range{0.0, 0.0};
  double dual_objective = 0.0;

  double decision_value(const InitialCondition& ic) const;
  bool classify(const InitialCondition& ic) const;  // true = safe
  // Box cap C_i for a support vector's class.
  double box_cap(int lbl) const;
  void validate() const;
};

SafeRegionModel train_safe_region(const ReachMap& reach, const SvmHyperparams& hp = {});

void save_safe_region(const std::filesystem::path& path, const SafeRegionModel& model);
SafeRegionModel load_safe_region(const std::filesystem::path& path);

}  // namespace stepmap
