#include "stepmap/param_grid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stepmap/csv.hpp"
#include "stepmap/rng.hpp"
#include "stepmap/workers.hpp"

namespace stepmap {

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw std::invalid_argument(std::string(name) + " axis is empty");
  for (size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1]))
      throw std::invalid_argument(std::string(name) + " axis must be strictly increasing");
  }
}

// Index of the cell containing v, clamped so v == axis.back() lands in the
// last cell.
int cell_index(const std::vector<double>& axis, double v) {
  const int n = static_cast<int>(axis.size());
  int i = static_cast<int>(std::upper_bound(axis.begin(), axis.end(), v) - axis.begin()) - 1;
  return std::clamp(i, 0, n - 2);
}

}  // namespace

void ParamGrid::validate() const {
  check_axis(velocities, "velocity");
  check_axis(positions, "position");
  const size_t n = velocities.size() * positions.size();
  if (params.size() != n || best_j.size() != n)
    throw std::invalid_argument("param grid: node storage does not match the axes");
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("linspace: need at least one sample");
  std::vector<double> out(static_cast<size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  out.back() = hi;
  return out;
}

GaitParams query_params(const ParamGrid& grid, const InitialCondition& ic) {
  grid.validate();
  const auto& vs = grid.velocities;
  const auto& ps = grid.positions;
  if (ic.xdot0 < vs.front() || ic.xdot0 > vs.back() || ic.s_des < ps.front() ||
      ic.s_des > ps.back()) {
    throw std::out_of_range("query_params: initial condition outside the grid bounding box");
  }
  if (vs.size() == 1 || ps.size() == 1)
    throw std::out_of_range("query_params: grid needs at least 2x2 nodes to interpolate");

  const int iv = cell_index(vs, ic.xdot0);
  const int jp = cell_index(ps, ic.s_des);
  const double wv = (ic.xdot0 - vs[static_cast<size_t>(iv)]) /
                    (vs[static_cast<size_t>(iv + 1)] - vs[static_cast<size_t>(iv)]);
  const double wp = (ic.s_des - ps[static_cast<size_t>(jp)]) /
                    (ps[static_cast<size_t>(jp + 1)] - ps[static_cast<size_t>(jp)]);

  const Eigen::Vector4d p00 = grid.at(iv, jp).as_vector();
  const Eigen::Vector4d p01 = grid.at(iv, jp + 1).as_vector();
  const Eigen::Vector4d p10 = grid.at(iv + 1, jp).as_vector();
  const Eigen::Vector4d p11 = grid.at(iv + 1, jp + 1).as_vector();

  const Eigen::Vector4d interp = (1.0 - wv) * ((1.0 - wp) * p00 + wp * p01) +
                                 wv * ((1.0 - wp) * p10 + wp * p11);
  return GaitParams::from_vector(interp);
}

ParamGrid build_param_grid(const std::vector<double>& velocities,
                           const std::vector<double>& positions, const BoBudget& budget,
                           const ParamBounds& bounds, const GridObjective& objective,
                           int workers, std::vector<NodeReport>* reports,
                           std::vector<std::vector<BoStep>>* traces,
                           std::vector<int>* failed_nodes) {
  check_axis(velocities, "velocity");
  check_axis(positions, "position");
  budget.validate();

  const int nv = static_cast<int>(velocities.size());
  const int np = static_cast<int>(positions.size());
  const int n_nodes = nv * np;

  ParamGrid grid;
  grid.velocities = velocities;
  grid.positions = positions;
  grid.params.resize(static_cast<size_t>(n_nodes));
  grid.best_j.resize(static_cast<size_t>(n_nodes));
  if (reports) reports->assign(static_cast<size_t>(n_nodes), NodeReport{});
  if (traces) traces->assign(static_cast<size_t>(n_nodes), {});

  const auto run_node = [&](int node) {
    const int iv = node / np;
    const int jp = node % np;
    const InitialCondition ic{velocities[static_cast<size_t>(iv)],
                              positions[static_cast<size_t>(jp)]};

    BoBudget node_budget = budget;
    node_budget.seed = derive_seed(budget.seed, static_cast<uint64_t>(iv),
                                   static_cast<uint64_t>(jp));

    const auto t0 = std::chrono::steady_clock::now();
    const BoResult res =
        optimize_pair([&](const GaitParams& p) { return objective(ic, p); }, bounds,
                      node_budget);
    const auto t1 = std::chrono::steady_clock::now();

    grid.params[static_cast<size_t>(node)] = res.best;
    grid.best_j[static_cast<size_t>(node)] = res.best_objective;
    if (reports) {
      NodeReport& r = (*reports)[static_cast<size_t>(node)];
      r.iv = iv;
      r.jp = jp;
      r.xdot0 = ic.xdot0;
      r.s_des = ic.s_des;
      r.best_j = res.best_objective;
      r.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      r.early_terminations = res.early_terminations;
    }
    if (traces) (*traces)[static_cast<size_t>(node)] = res.trace;
  };

  if (!failed_nodes) {
    run_jobs_or_throw(n_nodes, workers, run_node);
  } else {
    failed_nodes->clear();
    const std::vector<std::exception_ptr> errors = run_jobs(n_nodes, workers, run_node);
    for (int node = 0; node < n_nodes; ++node) {
      if (errors[static_cast<size_t>(node)]) {
        failed_nodes->push_back(node);
        grid.best_j[static_cast<size_t>(node)] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  return grid;
}

void write_param_grid_csv(const std::filesystem::path& path, const ParamGrid& grid) {
  grid.validate();
  std::vector<std::vector<double>> rows;
  rows.reserve(grid.params.size());
  for (size_t iv = 0; iv < grid.velocities.size(); ++iv) {
    for (size_t jp = 0; jp < grid.positions.size(); ++jp) {
      const size_t node = iv * grid.positions.size() + jp;
      const GaitParams& p = grid.params[node];
      rows.push_back({grid.velocities[iv], grid.positions[jp], p.t_min, p.s_max,
                      p.t_swing_start, p.s_speed, grid.best_j[node]});
    }
  }
  write_csv(path, {"xdot0", "s_des", "t_min", "s_max", "t_swing_start", "s_speed", "best_J"},
            rows);
}

ParamGrid read_param_grid_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const int c_v = table.column("xdot0");
  const int c_s = table.column("s_des");
  const int c0 = table.column("t_min");
  const int c1 = table.column("s_max");
  const int c2 = table.column("t_swing_start");
  const int c3 = table.column("s_speed");
  const int c_j = table.column("best_J");

  ParamGrid grid;
  for (const auto& row : table.rows) {
    const double v = row[static_cast<size_t>(c_v)];
    const double s = row[static_cast<size_t>(c_s)];
    if (grid.velocities.empty() || v != grid.velocities.back()) grid.velocities.push_back(v);
    if (grid.velocities.size() == 1) grid.positions.push_back(s);
    GaitParams p;
    p.t_min = row[static_cast<size_t>(c0)];
    p.s_max = row[static_cast<size_t>(c1)];
    p.t_swing_start = row[static_cast<size_t>(c2)];
    p.s_speed = row[static_cast<size_t>(c3)];
    grid.params.push_back(p);
    grid.best_j.push_back(row[static_cast<size_t>(c_j)]);
  }
  grid.validate();
  return grid;
}

}  // namespace stepmap
