#include "stepmap/selector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace stepmap {

namespace {

double to_unit_interval(const StepSelector& sel, double v) {
  const double span = sel.velocity_range[1] - sel.velocity_range[0];
  if (!(span > 0.0)) return 0.0;
  return 2.0 * (v - sel.velocity_range[0]) / span - 1.0;
}

double poly_eval(const std::array<double, 5>& c, double u) {
  double acc = c[4];
  for (int k = 3; k >= 0; --k) acc = acc * u + c[static_cast<size_t>(k)];
  return acc;
}

}  // namespace

void StepSelector::validate() const {
  if (train_velocities.size() != train_argmin.size())
    throw std::invalid_argument("step selector: sample arrays disagree in length");
  if (train_velocities.empty()) throw std::invalid_argument("step selector: no samples");
  if (!(velocity_range[0] <= velocity_range[1]) || !(position_range[0] <= position_range[1]))
    throw std::invalid_argument("step selector: invalid axis ranges");
  for (double c : coeffs)
    if (!std::isfinite(c)) throw std::invalid_argument("step selector: non-finite coefficient");
}

StepSelector fit_step_selector(const TorqueMap& tmap) {
  tmap.validate();
  const int nv = static_cast<int>(tmap.velocities.size());
  const int np = static_cast<int>(tmap.positions.size());

  StepSelector sel;
  sel.velocity_range = {tmap.velocities.front(), tmap.velocities.back()};
  sel.position_range = {tmap.positions.front(), tmap.positions.back()};
  sel.train_velocities = tmap.velocities;
  sel.train_argmin.resize(static_cast<size_t>(nv));

  for (int iv = 0; iv < nv; ++iv) {
    int best = -1;
    double best_j = std::numeric_limits<double>::infinity();
    for (int jp = 0; jp < np; ++jp) {
      const int i = tmap.index(iv, jp);
      if (!tmap.present[static_cast<size_t>(i)]) continue;
      // Strict comparison keeps the first (smallest s_des) cell on ties.
      if (tmap.j_tau[static_cast<size_t>(i)] < best_j) {
        best_j = tmap.j_tau[static_cast<size_t>(i)];
        best = jp;
      }
    }
    if (best < 0)
      throw std::invalid_argument(
          "fit_step_selector: velocity column " + std::to_string(iv) + " (xdot0=" +
          std::to_string(tmap.velocities[static_cast<size_t>(iv)]) + ") has no reachable cells");
    sel.train_argmin[static_cast<size_t>(iv)] = tmap.positions[static_cast<size_t>(best)];
  }

  Eigen::MatrixXd a(nv, 5);
  Eigen::VectorXd b(nv);
  for (int i = 0; i < nv; ++i) {
    const double u = to_unit_interval(sel, tmap.velocities[static_cast<size_t>(i)]);
    double p = 1.0;
    for (int k = 0; k < 5; ++k) {
      a(i, k) = p;
      p *= u;
    }
    b(i) = sel.train_argmin[static_cast<size_t>(i)];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  for (int k = 0; k < 5; ++k) sel.coeffs[static_cast<size_t>(k)] = c(k);

  double sum = 0.0, sq = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < nv; ++i) {
    const double r = std::abs(poly_eval(sel.coeffs, a(i, 1)) - b(i));
    sum += r;
    sq += r * r;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  sel.residuals.mean = sum / nv;
  sel.residuals.stddev = std::sqrt(std::max(0.0, sq / nv - sel.residuals.mean * sel.residuals.mean));
  sel.residuals.min = lo;
  sel.residuals.max = hi;
  sel.validate();
  return sel;
}

double select_step(const StepSelector& sel, double xdot0) {
  sel.validate();
  if (xdot0 < sel.velocity_range[0] || xdot0 > sel.velocity_range[1])
    throw std::out_of_range("select_step: velocity " + std::to_string(xdot0) +
                            " outside the fitted range");
  const double s = poly_eval(sel.coeffs, to_unit_interval(sel, xdot0));
  return std::clamp(s, sel.position_range[0], sel.position_range[1]);
}

void save_step_selector(const std::filesystem::path& path, const StepSelector& sel) {
  sel.validate();
  nlohmann::json j;
  j["degree"] = 4;
  j["coeffs"] = sel.coeffs;
  j["velocity_range"] = sel.velocity_range;
  j["position_range"] = sel.position_range;
  j["residuals"] = {{"mean", sel.residuals.mean},
                    {"stddev", sel.residuals.stddev},
                    {"min", sel.residuals.min},
                    {"max", sel.residuals.max}};
  j["train_velocities"] = sel.train_velocities;
  j["train_argmin"] = sel.train_argmin;
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

StepSelector load_step_selector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  StepSelector sel;
  sel.coeffs = j.at("coeffs").get<std::array<double, 5>>();
  sel.velocity_range = j.at("velocity_range").get<std::array<double, 2>>();
  sel.position_range = j.at("position_range").get<std::array<double, 2>>();
  sel.residuals.mean = j.at("residuals").at("mean").get<double>();
  sel.residuals.stddev = j.at("residuals").at("stddev").get<double>();
  sel.residuals.min = j.at("residuals").at("min").get<double>();
  sel.residuals.max = j.at("residuals").at("max").get<double>();
  sel.train_velocities = j.at("train_velocities").get<std::vector<double>>();
  sel.train_argmin = j.at("train_argmin").get<std::vector<double>>();
  sel.validate();
  return sel;
}

}  // namespace stepmap
