#include "stepmap/maps.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stepmap/csv.hpp"
#include "stepmap/workers.hpp"

namespace stepmap {

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw std::invalid_argument(std::string(name) + " axis is empty");
  for (size_t i = 1; i < axis.size(); ++i)
    if (!(axis[i] > axis[i - 1]))
      throw std::invalid_argument(std::string(name) + " axis must be strictly increasing");
}

}  // namespace

void ReachMap::validate() const {
  check_axis(velocities, "velocity");
  check_axis(positions, "position");
  if (reachable.size() != velocities.size() * positions.size())
    throw std::invalid_argument("reach map: cell storage does not match the axes");
}

void TorqueMap::validate() const {
  check_axis(velocities, "velocity");
  check_axis(positions, "position");
  const size_t n = velocities.size() * positions.size();
  if (j_tau.size() != n || present.size() != n)
    throw std::invalid_argument("torque map: cell storage does not match the axes");
  for (size_t i = 0; i < n; ++i)
    if (present[i] && !(j_tau[i] >= 0.0))
      throw std::invalid_argument("torque map: negative torque integral");
}

std::pair<ReachMap, TorqueMap> build_dense_maps(const ParamGrid& grid,
                                                const std::vector<double>& velocities,
                                                const std::vector<double>& positions,
                                                const MapObjective& episode, int workers) {
  grid.validate();
  check_axis(velocities, "velocity");
  check_axis(positions, "position");
  if (velocities.front() < grid.velocities.front() ||
      velocities.back() > grid.velocities.back() ||
      positions.front() < grid.positions.front() || positions.back() > grid.positions.back())
    throw std::invalid_argument("build_dense_maps: axes outside the parameter-grid box");

  const int nv = static_cast<int>(velocities.size());
  const int np = static_cast<int>(positions.size());
  const int n_cells = nv * np;

  ReachMap rmap;
  rmap.velocities = velocities;
  rmap.positions = positions;
  rmap.reachable.assign(static_cast<size_t>(n_cells), 0);

  TorqueMap tmap;
  tmap.velocities = velocities;
  tmap.positions = positions;
  tmap.j_tau.assign(static_cast<size_t>(n_cells), 0.0);
  tmap.present.assign(static_cast<size_t>(n_cells), 0);

  run_jobs_or_throw(n_cells, workers, [&](int cell) {
    const int iv = cell / np;
    const int jp = cell % np;
    const InitialCondition ic{velocities[static_cast<size_t>(iv)],
                              positions[static_cast<size_t>(jp)]};
    const GaitParams p = query_params(grid, ic);
    const MapCellResult res = episode(ic, p);
    if (res.success) {
      rmap.reachable[static_cast<size_t>(cell)] = 1;
      tmap.present[static_cast<size_t>(cell)] = 1;
      tmap.j_tau[static_cast<size_t>(cell)] = res.j_tau;
    }
  });

  return {rmap, tmap};
}

std::vector<uint8_t> near_optimal_regions(const TorqueMap& tmap, double delta) {
  tmap.validate();
  if (!(delta >= 0.0)) throw std::invalid_argument("near_optimal_regions: delta must be >= 0");
  const int nv = static_cast<int>(tmap.velocities.size());
  const int np = static_cast<int>(tmap.positions.size());
  std::vector<uint8_t> mask(static_cast<size_t>(nv * np), 0);

  for (int iv = 0; iv < nv; ++iv) {
    double col_min = std::numeric_limits<double>::infinity();
    for (int jp = 0; jp < np; ++jp) {
      const int i = tmap.index(iv, jp);
      if (tmap.present[static_cast<size_t>(i)])
        col_min = std::min(col_min, tmap.j_tau[static_cast<size_t>(i)]);
    }
    if (!std::isfinite(col_min)) continue;
    // An infinite delta admits every present cell even when col_min == 0,
    // where (1 + inf) * 0 would be NaN.
    const double cutoff = std::isinf(delta) ? std::numeric_limits<double>::infinity()
                                            : (1.0 + delta) * col_min;
    for (int jp = 0; jp < np; ++jp) {
      const int i = tmap.index(iv, jp);
      if (tmap.present[static_cast<size_t>(i)] &&
          tmap.j_tau[static_cast<size_t>(i)] <= cutoff)
        mask[static_cast<size_t>(i)] = 1;
    }
  }
  return mask;
}

void write_maps_csv(const std::filesystem::path& path, const ReachMap& rmap,
                    const TorqueMap& tmap) {
  rmap.validate();
  tmap.validate();
  if (rmap.velocities != tmap.velocities || rmap.positions != tmap.positions)
    throw std::invalid_argument("map csv: reach and torque axes differ");
  std::vector<std::vector<double>> rows;
  rows.reserve(rmap.reachable.size());
  const int np = static_cast<int>(rmap.positions.size());
  for (size_t iv = 0; iv < rmap.velocities.size(); ++iv) {
    for (int jp = 0; jp < np; ++jp) {
      const int i = rmap.index(static_cast<int>(iv), jp);
      const bool present = tmap.present[static_cast<size_t>(i)] != 0;
      rows.push_back({rmap.velocities[iv], rmap.positions[static_cast<size_t>(jp)],
                      rmap.at(static_cast<int>(iv), jp) ? 1.0 : 0.0,
                      present ? tmap.j_tau[static_cast<size_t>(i)]
                              : std::numeric_limits<double>::quiet_NaN()});
    }
  }
  write_csv(path, {"xdot0", "s_des", "reachable", "j_tau"}, rows);
}

std::pair<ReachMap, TorqueMap> read_maps_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const int c_v = table.column("xdot0");
  const int c_s = table.column("s_des");
  const int c_r = table.column("reachable");
  const int c_j = table.column("j_tau");

  ReachMap rmap;
  TorqueMap tmap;
  for (const auto& row : table.rows) {
    const double v = row[static_cast<size_t>(c_v)];
    const double s = row[static_cast<size_t>(c_s)];
    if (rmap.velocities.empty() || v != rmap.velocities.back()) rmap.velocities.push_back(v);
    if (rmap.velocities.size() == 1) rmap.positions.push_back(s);
    const bool reach = row[static_cast<size_t>(c_r)] != 0.0;
    const double j = row[static_cast<size_t>(c_j)];
    rmap.reachable.push_back(reach ? 1 : 0);
    tmap.present.push_back((reach && std::isfinite(j)) ? 1 : 0);
    tmap.j_tau.push_back(std::isfinite(j) ? j : 0.0);
  }
  tmap.velocities = rmap.velocities;
  tmap.positions = rmap.positions;
  rmap.validate();
  tmap.validate();
  return {rmap, tmap};
}

}  // namespace stepmap
