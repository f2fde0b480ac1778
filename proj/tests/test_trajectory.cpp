#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "stepmap/trajectory.hpp"

using namespace stepmap;

namespace {

GaitParams test_params() {
  GaitParams p;
  p.t_min = 0.3;
  p.s_max = 0.3;
  p.t_swing_start = 0.05;
  p.s_speed = 1.0;
  return p;
}

}  // namespace

TEST_CASE("[TRIVIAL] min-jerk boundary conditions to 1e-12") {
  const double T = 0.73;
  const PVA start = min_jerk(0.0, 0.4, T, 0.0);
  CHECK(std::abs(start.pos) < 1e-12);
  CHECK(std::abs(start.vel) < 1e-12);
  CHECK(std::abs(start.acc) < 1e-12);

  const PVA end = min_jerk(0.0, 0.4, T, T);
  CHECK(std::abs(end.pos - 0.4) < 1e-12);
  CHECK(std::abs(end.vel) < 1e-12);
  CHECK(std::abs(end.acc) < 1e-12);

  const PVA mid = min_jerk(0.0, 0.4, T, T / 2.0);
  CHECK(std::abs(mid.pos - 0.2) < 1e-12);

  CHECK_THROWS_AS((void)min_jerk(0.0, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)min_jerk(0.0, 1.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("swing trajectory: timing, apex, displacement, monotonicity") {
  const GaitParams p = test_params();
  const SwingTrajConfig cfg;  // z_max = 0.08
  const Eigen::Vector3d start(0.0, 0.0, 0.01);
  const double dt = 1e-3;
  const double s_des = 0.4;  // T_sw = 0.4 s at s_speed = 1
  const Trajectory traj = gen_swing_traj(s_des, p, cfg, start, dt, 7.0);

  Eigen::Vector3d pos, vel;

  SUBCASE("[TRIVIAL] hold segment before t_swing_start") {
    traj.sample(0.0, pos, vel);
    CHECK((pos - Eigen::Vector3d(0.0, 0.0, 0.01)).norm() < 1e-12);
    traj.sample(0.04, pos, vel);
    CHECK((pos - Eigen::Vector3d(0.0, 0.0, 0.01)).norm() < 1e-12);
  }

  SUBCASE("[TRIVIAL] x midpoint symmetry: half the travel at half the duration") {
    traj.sample(p.t_swing_start + 0.2, pos, vel);
    CHECK(std::abs(pos.x() - 0.2) < 1e-9);
  }

  SUBCASE("[PAPER] apex equals z_max = 0.08 m") {
    traj.sample(p.t_swing_start + 0.2, pos, vel);
    CHECK(std::abs(pos.z() - cfg.z_max) < 1e-9);
    // and it is the maximum over the whole trajectory
    double z_peak = 0.0;
    for (const auto& s : traj.samples) z_peak = std::max(z_peak, s.z());
    CHECK(std::abs(z_peak - cfg.z_max) < 1e-9);
  }

  SUBCASE("[TRIVIAL] total x displacement equals s_des; landing z is zero") {
    traj.sample(p.t_swing_start + 0.4, pos, vel);
    CHECK(std::abs(pos.x() - s_des) < 1e-12);
    CHECK(std::abs(pos.z()) < 1e-12);
    traj.sample(6.9, pos, vel);  // hold after landing
    CHECK(std::abs(pos.x() - s_des) < 1e-12);
  }

  SUBCASE("[TRIVIAL] x is monotonically non-decreasing, y identically zero") {
    for (size_t k = 1; k < traj.samples.size(); ++k) {
      CHECK(traj.samples[k].x() >= traj.samples[k - 1].x() - 1e-12);
      CHECK(traj.samples[k].y() == 0.0);
    }
  }

  SUBCASE("[TRIVIAL] generation is pure") {
    const Trajectory again = gen_swing_traj(s_des, p, cfg, start, dt, 7.0);
    REQUIRE(again.samples.size() == traj.samples.size());
    for (size_t k = 0; k < traj.samples.size(); ++k)
      CHECK((again.samples[k].array() == traj.samples[k].array()).all());
  }

  CHECK_THROWS_AS((void)gen_swing_traj(-0.1, p, cfg, start, dt, 7.0), std::invalid_argument);
}

TEST_CASE("CoM trajectory: LIPM pieces") {
  const GaitParams p = test_params();
  const double z_nom = 0.925;
  const double g = 9.81;
  const double omega = std::sqrt(g / z_nom);

  SUBCASE("[DERIVED] omega for the default heights") {
    CHECK(std::abs(omega - 3.2566) < 1e-3);
  }

  SUBCASE("[TRIVIAL] zero initial velocity keeps the pre-switch reference at zero") {
    const Trajectory traj = gen_com_traj(0.0, p, 0.3, z_nom, 1e-3, 1.0, g);
    // T_sw_ref = max(0.3, 0.3/1 + 0.05) = 0.35
    for (int k = 0; k <= 349; ++k) CHECK(traj.samples[static_cast<size_t>(k)].x() == 0.0);
  }

  SUBCASE("[TRIVIAL] position and velocity are continuous at the pivot switch") {
    const Trajectory traj = gen_com_traj(0.3, p, 0.3, z_nom, 1e-4, 2.0, g);
    const double T_sw = 0.35;
    const int k_sw = static_cast<int>(std::llround(T_sw / traj.dt));
    for (int k = k_sw - 2; k <= k_sw + 2; ++k) {
      const double step = std::abs(traj.samples[static_cast<size_t>(k + 1)].x() -
                                   traj.samples[static_cast<size_t>(k)].x());
      CHECK(step < 2.0 * 0.6 * traj.dt);  // bounded by max reference speed
    }
  }

  SUBCASE("[DERIVED] samples satisfy the LIPM ODE away from switch and freeze") {
    const double dt = 1e-4;
    const double xdot0 = 0.3;
    const double s_des = 0.3;
    const Trajectory traj = gen_com_traj(xdot0, p, s_des, z_nom, dt, 2.0, g);

    const double T_sw = std::max(p.t_min, s_des / p.s_speed + p.t_swing_start);
    const double pivot = std::min(s_des, p.s_max);

    // Locate the freeze by the first zero step after the switch.
    double t_freeze = 2.0;
    for (size_t k = static_cast<size_t>(T_sw / dt) + 2; k + 1 < traj.samples.size(); ++k) {
      if (traj.samples[k + 1].x() == traj.samples[k].x()) {
        t_freeze = static_cast<double>(k) * dt;
        break;
      }
    }
    REQUIRE(t_freeze < 2.0);  // this scenario settles

    int checked = 0;
    for (size_t k = 1; k + 1 < traj.samples.size(); ++k) {
      const double t = static_cast<double>(k) * dt;
      // Skip the kink neighbourhoods: the ODE pivot changes at T_sw and the
      // reference is clamped at t_freeze.
      if (std::abs(t - T_sw) < 2.5 * dt || t > t_freeze - 2.5 * dt) continue;
      const double x = traj.samples[k].x();
      const double acc = (traj.samples[k + 1].x() - 2.0 * x + traj.samples[k - 1].x()) /
                         (dt * dt);
      const double expected = omega * omega * (x - (t < T_sw ? 0.0 : pivot));
      CHECK(std::abs(acc - expected) < 1e-6);
      ++checked;
    }
    CHECK(checked > 1000);

    // z and y are constant references.
    for (const auto& s : traj.samples) {
      CHECK(s.z() == z_nom);
      CHECK(s.y() == 0.0);
    }
  }

  CHECK_THROWS_AS((void)gen_com_traj(-0.1, p, 0.3, z_nom, 1e-3, 1.0, g),
                  std::invalid_argument);
}

TEST_CASE("[TRIVIAL] trajectory sampling semantics") {
  Trajectory traj;
  traj.dt = 0.1;
  traj.start_time = 0.0;
  traj.samples = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 2),
                  Eigen::Vector3d(4, 0, 0)};

  Eigen::Vector3d pos, vel;

  traj.sample(0.1, pos, vel);  // exactly on a sample
  CHECK((pos - Eigen::Vector3d(1, 0, 2)).norm() == 0.0);

  traj.sample(0.05, pos, vel);  // midpoint: arithmetic mean
  CHECK((pos - Eigen::Vector3d(0.5, 0.0, 1.0)).norm() < 1e-12);

  traj.sample(5.0, pos, vel);  // beyond the end: hold with zero rates
  CHECK((pos - Eigen::Vector3d(4, 0, 0)).norm() == 0.0);
  CHECK(vel.norm() == 0.0);

  CHECK(traj.end_time() == doctest::Approx(0.2).epsilon(1e-12));
}
