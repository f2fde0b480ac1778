#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include "doctest.h"
#include "stepmap/param_grid.hpp"
#include "stepmap/workers.hpp"

using namespace stepmap;

namespace {

// Tensor-product-affine node values: bilinear interpolation reproduces these
// exactly everywhere inside the box, not just at nodes.
GaitParams affine_params(double v, double s) {
  GaitParams p;
  p.t_min = 0.2 + 0.1 * v + 0.05 * s + 0.03 * v * s;
  p.s_max = 0.5 - 0.2 * v + 0.1 * s - 0.07 * v * s;
  p.t_swing_start = 0.01 + 0.02 * v + 0.04 * s + 0.01 * v * s;
  p.s_speed = 1.0 + 0.5 * v - 0.3 * s + 0.2 * v * s;
  return p;
}

ParamGrid affine_grid() {
  ParamGrid grid;
  grid.velocities = {0.1, 0.3, 0.5};
  grid.positions = {0.2, 0.5, 0.8};
  for (double v : grid.velocities) {
    for (double s : grid.positions) {
      grid.params.push_back(affine_params(v, s));
      grid.best_j.push_back(-(v + s));
    }
  }
  return grid;
}

std::filesystem::path temp_csv(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("[DERIVED] bilinear query is exact at nodes and for tensor-affine data") {
  const ParamGrid grid = affine_grid();

  SUBCASE("node queries return the stored parameters bit-for-bit") {
    for (size_t i = 0; i < grid.velocities.size(); ++i) {
      for (size_t j = 0; j < grid.positions.size(); ++j) {
        const GaitParams got =
            query_params(grid, {grid.velocities[i], grid.positions[j]});
        const GaitParams want = grid.at(static_cast<int>(i), static_cast<int>(j));
        CHECK((got.as_vector() - want.as_vector()).norm() == 0.0);
      }
    }
  }

  SUBCASE("cell centers average the four corners") {
    const double vc = 0.5 * (0.1 + 0.3);
    const double sc = 0.5 * (0.5 + 0.8);
    const GaitParams got = query_params(grid, {vc, sc});
    const Eigen::Vector4d want = 0.25 * (grid.at(0, 1).as_vector() + grid.at(0, 2).as_vector() +
                                         grid.at(1, 1).as_vector() + grid.at(1, 2).as_vector());
    CHECK((got.as_vector() - want).norm() < 1e-12);
  }

  SUBCASE("edge midpoints average the two adjacent nodes") {
    const GaitParams got = query_params(grid, {0.3, 0.5 * (0.2 + 0.5)});
    const Eigen::Vector4d want = 0.5 * (grid.at(1, 0).as_vector() + grid.at(1, 1).as_vector());
    CHECK((got.as_vector() - want).norm() < 1e-12);
  }

  SUBCASE("arbitrary interior points match the affine closed form") {
    const double pts[][2] = {{0.17, 0.31}, {0.29, 0.62}, {0.42, 0.75}, {0.1, 0.8}, {0.5, 0.2}};
    for (const auto& pt : pts) {
      const GaitParams got = query_params(grid, {pt[0], pt[1]});
      const GaitParams want = affine_params(pt[0], pt[1]);
      CHECK((got.as_vector() - want.as_vector()).norm() < 1e-12);
    }
  }

  SUBCASE("the interpolant is continuous across interior node lines") {
    const double eps = 1e-12;
    const GaitParams below = query_params(grid, {0.3 - eps, 0.44});
    const GaitParams above = query_params(grid, {0.3 + eps, 0.44});
    CHECK((below.as_vector() - above.as_vector()).norm() < 1e-10);

    const GaitParams left = query_params(grid, {0.22, 0.5 - eps});
    const GaitParams right = query_params(grid, {0.22, 0.5 + eps});
    CHECK((left.as_vector() - right.as_vector()).norm() < 1e-10);
  }
}

TEST_CASE("[TRIVIAL] query_params refuses extrapolation and degenerate grids") {
  const ParamGrid grid = affine_grid();
  CHECK_THROWS_AS((void)query_params(grid, {0.0999, 0.5}), std::out_of_range);
  CHECK_THROWS_AS((void)query_params(grid, {0.5001, 0.5}), std::out_of_range);
  CHECK_THROWS_AS((void)query_params(grid, {0.3, 0.1999}), std::out_of_range);
  CHECK_THROWS_AS((void)query_params(grid, {0.3, 0.8001}), std::out_of_range);
  // Boundary values themselves are in range.
  CHECK_NOTHROW((void)query_params(grid, {0.1, 0.2}));
  CHECK_NOTHROW((void)query_params(grid, {0.5, 0.8}));

  ParamGrid row;
  row.velocities = {0.3};
  row.positions = {0.2, 0.5};
  row.params.assign(2, GaitParams{});
  row.best_j.assign(2, 0.0);
  CHECK_THROWS_AS((void)query_params(row, {0.3, 0.3}), std::out_of_range);

  ParamGrid col;
  col.velocities = {0.2, 0.5};
  col.positions = {0.4};
  col.params.assign(2, GaitParams{});
  col.best_j.assign(2, 0.0);
  CHECK_THROWS_AS((void)query_params(col, {0.3, 0.4}), std::out_of_range);
}

TEST_CASE("[TRIVIAL] grid validation and linspace") {
  ParamGrid bad = affine_grid();
  bad.params.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  ParamGrid unsorted = affine_grid();
  std::swap(unsorted.velocities[0], unsorted.velocities[1]);
  CHECK_THROWS_AS(unsorted.validate(), std::invalid_argument);

  ParamGrid empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

  const std::vector<double> axis = linspace(0.1, 0.5, 15);
  REQUIRE(axis.size() == 15);
  CHECK(axis.front() == 0.1);
  CHECK(axis.back() == 0.5);
  for (size_t i = 1; i < axis.size(); ++i) {
    CHECK(axis[i] > axis[i - 1]);
    CHECK(std::abs((axis[i] - axis[i - 1]) - 0.4 / 14.0) < 1e-15);
  }
  CHECK(linspace(2.0, 9.0, 1) == std::vector<double>{2.0});
  CHECK(linspace(0.0, 1.0, 2) == std::vector<double>({0.0, 1.0}));
  CHECK_THROWS_AS((void)linspace(0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("[DERIVED] param grid CSV round-trip preserves values exactly") {
  ParamGrid grid = affine_grid();
  grid.best_j[4] = std::numeric_limits<double>::quiet_NaN();  // a failed node
  grid.params[2].s_speed = 1.0 / 3.0;                         // needs all 17 digits

  const auto path = temp_csv("stepmap_test_interp_grid.csv");
  write_param_grid_csv(path, grid);
  const ParamGrid back = read_param_grid_csv(path);
  std::filesystem::remove(path);

  REQUIRE(back.velocities == grid.velocities);
  REQUIRE(back.positions == grid.positions);
  REQUIRE(back.params.size() == grid.params.size());
  for (size_t k = 0; k < grid.params.size(); ++k) {
    CHECK((back.params[k].as_vector() - grid.params[k].as_vector()).norm() == 0.0);
    if (std::isnan(grid.best_j[k])) {
      CHECK(std::isnan(back.best_j[k]));
    } else {
      CHECK(back.best_j[k] == grid.best_j[k]);
    }
  }
}

TEST_CASE("[DERIVED] build_param_grid: worker invariance, seeds, reports, failures") {
  const std::vector<double> vels{0.1, 0.4};
  const std::vector<double> poss{0.2, 0.6};
  const ParamBounds bounds;
  BoBudget budget;
  budget.n_random = 6;
  budget.n_bayes = 2;
  budget.seed = 11;

  // Synthetic, episode-free objective whose optimum depends on the node.
  const GridObjective objective = [&](const InitialCondition& ic,
                                      const GaitParams& p) -> EvalResult {
    const Eigen::Vector4d u = ParamBounds{}.to_unit(p);
    const Eigen::Vector4d target(ic.xdot0, ic.s_des, 0.5, 0.5);
    return {-(u - target).squaredNorm(), ic.xdot0 > 0.3};
  };

  std::vector<NodeReport> reports1, reports4;
  std::vector<std::vector<BoStep>> traces;
  const ParamGrid g1 = build_param_grid(vels, poss, budget, bounds, objective, 1, &reports1,
                                        &traces);
  const ParamGrid g4 = build_param_grid(vels, poss, budget, bounds, objective, 4, &reports4);

  SUBCASE("identical results for any worker count") {
    REQUIRE(g1.params.size() == 4);
    REQUIRE(g4.params.size() == 4);
    for (size_t k = 0; k < 4; ++k) {
      CHECK((g1.params[k].as_vector() - g4.params[k].as_vector()).norm() == 0.0);
      CHECK(g1.best_j[k] == g4.best_j[k]);
    }
  }

  SUBCASE("reports and traces are indexed by node") {
    REQUIRE(reports1.size() == 4);
    REQUIRE(traces.size() == 4);
    for (int iv = 0; iv < 2; ++iv) {
      for (int jp = 0; jp < 2; ++jp) {
        const NodeReport& r = reports1[static_cast<size_t>(iv * 2 + jp)];
        CHECK(r.iv == iv);
        CHECK(r.jp == jp);
        CHECK(r.xdot0 == vels[static_cast<size_t>(iv)]);
        CHECK(r.s_des == poss[static_cast<size_t>(jp)]);
        CHECK(r.best_j == g1.best_j[static_cast<size_t>(iv * 2 + jp)]);
        CHECK(r.wall_ms >= 0.0);
        // This synthetic objective flags every evaluation at xdot0 = 0.4.
        CHECK(r.early_terminations == (iv == 1 ? 8 : 0));
        CHECK(traces[static_cast<size_t>(iv * 2 + jp)].size() == 8);
      }
    }
  }

  SUBCASE("different nodes get different seeds, hence different random covers") {
    const auto& t0 = traces[0];
    const auto& t1 = traces[1];
    REQUIRE(t0.size() == t1.size());
    CHECK((t0[0].unit - t1[0].unit).norm() > 1e-9);
  }

  SUBCASE("a failing node throws JobError by default") {
    const GridObjective failing = [&](const InitialCondition& ic,
                                      const GaitParams& p) -> EvalResult {
      if (ic.xdot0 > 0.3 && ic.s_des > 0.3) throw std::runtime_error("synthetic failure");
      return objective(ic, p);
    };
    CHECK_THROWS_AS(
        (void)build_param_grid(vels, poss, budget, bounds, failing, 2, nullptr, nullptr),
        JobError);

    std::vector<int> failed;
    const ParamGrid g = build_param_grid(vels, poss, budget, bounds, failing, 2, nullptr,
                                         nullptr, &failed);
    REQUIRE(failed.size() == 1);
    CHECK(failed[0] == 3);  // node (iv=1, jp=1)
    CHECK(std::isnan(g.best_j[3]));
    CHECK_FALSE(std::isnan(g.best_j[0]));
    for (size_t k = 0; k < 3; ++k) CHECK(g.best_j[k] == g1.best_j[k]);
  }
}
