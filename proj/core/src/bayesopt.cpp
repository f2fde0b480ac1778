#include "stepmap/bayesopt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stepmap/rng.hpp"

namespace stepmap {

void BoBudget::validate() const {
  if (n_random < 1) throw std::invalid_argument("bo budget: n_random must be >= 1");
  if (n_bayes < 0) throw std::invalid_argument("bo budget: n_bayes must be >= 0");
}

BoResult optimize_pair(const BoObjective& objective, const ParamBounds& bounds,
                       const BoBudget& budget, int n_candidates) {
  budget.validate();
  bounds.validate();
  if (n_candidates < 1) throw std::invalid_argument("optimize_pair: need candidates");

  constexpr std::array<uint32_t, 4> kHaltonBases{2, 3, 5, 7};

  BoResult result;
  result.trace.reserve(static_cast<size_t>(budget.n_random + budget.n_bayes));
  std::vector<Eigen::Vector4d> xs;
  std::vector<double> ys;
  xs.reserve(result.trace.capacity());
  ys.reserve(result.trace.capacity());

  double best_val = -std::numeric_limits<double>::infinity();
  Eigen::Vector4d best_unit = Eigen::Vector4d::Zero();

  auto evaluate = [&](const Eigen::Vector4d& u, bool random_phase) {
    const GaitParams p = bounds.from_unit(u);
    const EvalResult ev = objective(p);
    if (!std::isfinite(ev.objective))
      throw std::runtime_error("optimize_pair: objective returned a non-finite value");
    xs.push_back(u);
    ys.push_back(ev.objective);
    if (ev.early_termination) ++result.early_terminations;
    if (ev.objective > best_val) {
      best_val = ev.objective;
      best_unit = u;
    }
    BoStep step;
    step.iteration = static_cast<int>(xs.size()) - 1;
    step.random_phase = random_phase;
    step.unit = u;
    step.params = p;
    step.objective_value = ev.objective;
    step.incumbent = best_val;
    result.trace.push_back(step);
  };

  // Space-filling phase: Halton points with a seeded Cranley-Patterson
  // rotation, so different seeds explore different-but-even covers.
  Rng shift_rng(derive_seed(budget.seed, 0x5eedu));
  Eigen::Vector4d shift;
  for (int d = 0; d < 4; ++d) shift[d] = shift_rng.uniform();
  for (int k = 0; k < budget.n_random; ++k) {
    Eigen::Vector4d u;
    for (int d = 0; d < 4; ++d) {
      const double v = halton(static_cast<uint64_t>(k) + 1, kHaltonBases[d]) + shift[d];
      u[d] = v - std::floor(v);
    }
    evaluate(u, true);
  }

  // Model-guided phase.
  for (int round = 0; round < budget.n_bayes; ++round) {
    const GpModel gp = GpModel::fit(xs, ys);

    Rng cand_rng(derive_seed(budget.seed, 0xbead5u, static_cast<uint64_t>(round)));
    const int n_local = n_candidates / 4;
    Eigen::Vector4d best_cand = Eigen::Vector4d::Zero();
    double best_ei = -1.0;
    for (int c = 0; c < n_candidates; ++c) {
      Eigen::Vector4d u;
      if (c < n_candidates - n_local) {
        for (int d = 0; d < 4; ++d) u[d] = cand_rng.uniform();
      } else {
        // Local refinement around the incumbent.
        for (int d = 0; d < 4; ++d)
          u[d] = std::clamp(best_unit[d] + 0.05 * cand_rng.normal(), 0.0, 1.0);
      }
      const GpModel::Prediction pred = gp.predict(u);
      const double ei = expected_improvement(pred.mean, pred.variance, best_val);
      if (ei > best_ei) {
        best_ei = ei;
        best_cand = u;
      }
    }
    evaluate(best_cand, false);
  }

  result.best_unit = best_unit;
  result.best = bounds.from_unit(best_unit);
  result.best_objective = best_val;
  return result;
}

}  // namespace stepmap
