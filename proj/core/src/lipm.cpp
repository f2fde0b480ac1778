#include "stepmap/lipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stepmap {

double lipm_predict_step(double xdot0, double z_nom, double t_sw, double gravity) {
  if (!(z_nom > 0.0)) throw std::invalid_argument("lipm_predict_step: z_nom must be > 0");
  if (!(gravity > 0.0)) throw std::invalid_argument("lipm_predict_step: gravity must be > 0");
  if (!(t_sw >= 0.0)) throw std::invalid_argument("lipm_predict_step: t_sw must be >= 0");
  const double omega = std::sqrt(gravity / z_nom);
  const double x = (xdot0 / omega) * std::sinh(omega * t_sw);
  const double xd = xdot0 * std::cosh(omega * t_sw);
  return x + xd / omega;
}

namespace {

int nearest_index(const std::vector<double>& axis, double value) {
  int best = 0;
  double best_d = std::abs(value - axis[0]);
  for (size_t j = 1; j < axis.size(); ++j) {
    const double d = std::abs(value - axis[j]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

double swing_duration(const ParamGrid& grid, double xdot0, double s) {
  const GaitParams p = query_params(grid, {xdot0, s});
  return p.t_swing_start + s / p.s_speed;
}

}  // namespace

LipmComparison compare_lipm(const TorqueMap& tmap, const StepSelector& sel,
                            const ParamGrid& grid, double z_nom, double gravity) {
  tmap.validate();
  sel.validate();
  grid.validate();
  if (sel.train_velocities != tmap.velocities)
    throw std::invalid_argument("compare_lipm: selector was not fitted to this torque map");

  const int nv = static_cast<int>(tmap.velocities.size());
  const double grid_lo = grid.positions.front();
  const double grid_hi = grid.positions.back();

  LipmComparison cmp;
  cmp.rows.reserve(static_cast<size_t>(nv));
  std::vector<double> errs;

  for (int iv = 0; iv < nv; ++iv) {
    LipmRow row;
    row.xdot0 = tmap.velocities[static_cast<size_t>(iv)];
    row.s_opt = sel.train_argmin[static_cast<size_t>(iv)];
    const int j_opt_idx = nearest_index(tmap.positions, row.s_opt);
    row.j_opt = tmap.j_tau[static_cast<size_t>(tmap.index(iv, j_opt_idx))];
    row.j_lipm = std::numeric_limits<double>::quiet_NaN();

    // Swing duration from the optimal column's queried parameters, then two
    // fixed-point updates at the predicted positions. Intermediate
    // predictions are clamped into the grid box so the query stays legal;
    // only the final prediction decides in/out of bounds.
    double t_sw = swing_duration(grid, row.xdot0, row.s_opt);
    double s_pred = row.s_opt;
    for (int it = 0; it < 2; ++it) {
      s_pred = lipm_predict_step(row.xdot0, z_nom, t_sw, gravity);
      t_sw = swing_duration(grid, row.xdot0, std::clamp(s_pred, grid_lo, grid_hi));
    }
    row.s_lipm = s_pred;
    row.t_sw = t_sw;

    if (s_pred < tmap.positions.front() || s_pred > tmap.positions.back()) {
      row.status = LipmStatus::kOutOfBounds;
      ++cmp.n_out_of_bounds;
    } else {
      const int j_pred_idx = nearest_index(tmap.positions, s_pred);
      const int cell = tmap.index(iv, j_pred_idx);
      if (!tmap.present[static_cast<size_t>(cell)]) {
        row.status = LipmStatus::kUnreachable;
        ++cmp.n_unreachable;
      } else {
        row.status = LipmStatus::kCompared;
        row.j_lipm = tmap.j_tau[static_cast<size_t>(cell)];
        row.abs_err = std::abs(row.j_lipm - row.j_opt);
        errs.push_back(row.abs_err);
        ++cmp.n_compared;
      }
    }
    cmp.rows.push_back(row);
  }

  if (!errs.empty()) {
    double sum = 0.0, sq = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double e : errs) {
      sum += e;
      sq += e * e;
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    cmp.error.mean = sum / static_cast<double>(errs.size());
    cmp.error.stddev =
        std::sqrt(std::max(0.0, sq / static_cast<double>(errs.size()) -
                                    cmp.error.mean * cmp.error.mean));
    cmp.error.min = lo;
    cmp.error.max = hi;
  }
  return cmp;
}

}  // namespace stepmap
