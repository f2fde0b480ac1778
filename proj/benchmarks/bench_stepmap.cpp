#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "stepmap/biped.hpp"
#include "stepmap/controller.hpp"
#include "stepmap/episode.hpp"
#include "stepmap/gp.hpp"
#include "stepmap/param_grid.hpp"
#include "stepmap/selector.hpp"
#include "stepmap/trajectory.hpp"

namespace {

using namespace stepmap;

// One control tick: task-space torque solve plus the integrator step. This is
// the inner loop of every episode, so it dominates pipeline wall time.
void BM_ControlTick(benchmark::State& state) {
  const PlanarBiped biped{BipedConfig{}};
  const ControllerGains gains;
  RobotState s = biped.init_standing(0.3);
  const Kinematics kin = biped.kinematics(s);
  TaskRef com_ref;
  com_ref.pos = kin.com;
  TaskRef swing_ref;
  swing_ref.pos = kin.swing_foot;
  const Vec5 posture = s.q;
  for (auto _ : state) {
    const Vec5 tau = solve_torques(biped, s, com_ref, swing_ref, posture, gains);
    s = biped.step(s, tau, 1e-3);
    benchmark::DoNotOptimize(s.q.data());
  }
}
BENCHMARK(BM_ControlTick);

void BM_FullEpisode(benchmark::State& state) {
  const EpisodeConfig cfg;
  const GaitParams p;
  const InitialCondition ic{0.3, 0.3};
  for (auto _ : state) {
    const EpisodeOutcome out = run_episode(ic, p, cfg);
    benchmark::DoNotOptimize(out.j_tau);
  }
}
BENCHMARK(BM_FullEpisode)->Unit(benchmark::kMillisecond);

void BM_SwingTrajectory(benchmark::State& state) {
  const GaitParams p;
  const SwingTrajConfig swing;
  for (auto _ : state) {
    const Trajectory traj =
        gen_swing_traj(0.4, p, swing, Eigen::Vector3d(0.0, 0.0, 0.01), 1e-3, 7.0);
    benchmark::DoNotOptimize(traj.samples.data());
  }
}
BENCHMARK(BM_SwingTrajectory);

void BM_ComTrajectory(benchmark::State& state) {
  const GaitParams p;
  for (auto _ : state) {
    const Trajectory traj = gen_com_traj(0.3, p, 0.3, 0.925, 1e-3, 7.0);
    benchmark::DoNotOptimize(traj.samples.data());
  }
}
BENCHMARK(BM_ComTrajectory);

std::pair<std::vector<Eigen::Vector4d>, std::vector<double>> gp_dataset(int n) {
  std::mt19937_64 rng(17u);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::Vector4d> X;
  std::vector<double> y;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector4d x(unif(rng), unif(rng), unif(rng), unif(rng));
    X.push_back(x);
    y.push_back(std::sin(3.0 * x[0]) + x[1] * x[1] - 0.5 * x[2]);
  }
  return {X, y};
}

// GP hyperparameter selection + factorization at the BO working-set size.
void BM_GpFit(benchmark::State& state) {
  const auto [X, y] = gp_dataset(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const GpModel model = GpModel::fit(X, y);
    benchmark::DoNotOptimize(model.log_marginal_likelihood());
  }
}
BENCHMARK(BM_GpFit)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_GpPredict(benchmark::State& state) {
  const auto [X, y] = gp_dataset(50);
  const GpModel model = GpModel::fit(X, y);
  const Eigen::Vector4d query(0.3, 0.7, 0.1, 0.9);
  for (auto _ : state) {
    const auto pred = model.predict(query);
    benchmark::DoNotOptimize(pred.mean);
  }
}
BENCHMARK(BM_GpPredict);

ParamGrid bench_grid() {
  ParamGrid grid;
  grid.velocities = linspace(0.1, 0.5, 15);
  grid.positions = linspace(0.1, 0.8, 10);
  for (size_t i = 0; i < grid.velocities.size() * grid.positions.size(); ++i) {
    grid.params.push_back(GaitParams{});
    grid.best_j.push_back(-1.0);
  }
  return grid;
}

void BM_QueryParams(benchmark::State& state) {
  const ParamGrid grid = bench_grid();
  double v = 0.1;
  for (auto _ : state) {
    const GaitParams p = query_params(grid, {v, 0.43});
    benchmark::DoNotOptimize(p.t_min);
    v = (v >= 0.49) ? 0.1 : v + 1e-4;  // sweep cells to defeat caching
  }
}
BENCHMARK(BM_QueryParams);

void BM_SelectStep(benchmark::State& state) {
  TorqueMap map;
  map.velocities = linspace(0.1, 0.5, 40);
  map.positions = linspace(0.1, 0.8, 20);
  for (double v : map.velocities)
    for (double s : map.positions) {
      const double d = s - (0.3 + 0.5 * v);
      map.j_tau.push_back(1.0 + d * d);
      map.present.push_back(1);
    }
  const StepSelector sel = fit_step_selector(map);
  double v = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_step(sel, v));
    v = (v >= 0.49) ? 0.1 : v + 1e-4;
  }
}
BENCHMARK(BM_SelectStep);

}  // namespace

BENCHMARK_MAIN();
