#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stepmap/gp.hpp"
#include "stepmap/trajectory.hpp"

namespace stepmap {

struct BoBudget {
  int n_random = 100;
  int n_bayes = 70;
  uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// One evaluated point in the optimization trace.
struct BoStep {
  int iteration = 0;
  bool random_phase = true;
  Eigen::Vector4d unit = Eigen::Vector4d::Zero();
  GaitParams params;
  double objective_value = 0.0;
  double incumbent = 0.0;  // best observed value so far (non-decreasing)
};

struct BoResult {
  GaitParams best;
  Eigen::Vector4d best_unit = Eigen::Vector4d::Zero();
  double best_objective = 0.0;
  std::vector<BoStep> trace;
  int early_terminations = 0;  // episodes that ended before the horizon
};

struct EvalResult {
  double objective = 0.0;
  bool early_termination = false;
};

using BoObjective = std::function<EvalResult(const GaitParams&)>;

// GP + expected-improvement Bayesian optimization over the parameter box:
// n_random rotated-Halton evaluations, then n_bayes rounds maximizing EI over
// seeded candidates (uniform plus local perturbations around the incumbent).
// Fully deterministic for a fixed seed.
BoResult optimize_pair(const BoObjective& objective, const ParamBounds& bounds,
                       const BoBudget& budget, int n_candidates = 2048);

}  // namespace stepmap
