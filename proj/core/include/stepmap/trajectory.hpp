#pragma once

#include <Eigen/Core>
#include <vector>

namespace stepmap {

// The four open gait parameters: pivot-switch floor time, pivot cap, swing
// lift-off time, nominal swing travel speed.
struct GaitParams {
  double t_min = 0.3;          // s
  double s_max = 0.3;          // m
  double t_swing_start = 0.05; // s
  double s_speed = 1.0;        // m/s

  Eigen::Vector4d as_vector() const { return {t_min, s_max, t_swing_start, s_speed}; }
  static GaitParams from_vector(const Eigen::Vector4d& v) {
    return GaitParams{v[0], v[1], v[2], v[3]};
  }
};

// Search box for the gait parameters.
struct ParamBounds {
  Eigen::Vector4d lo{0.01, 0.01, 0.01, 0.2};
  Eigen::Vector4d hi{0.99, 0.99, 0.08, 3.0};

  bool contains(const GaitParams& p, double tol = 0.0) const;
  // Map a unit-cube point to parameters and back (used by the optimizer/GP).
  GaitParams from_unit(const Eigen::Vector4d& u) const;
  Eigen::Vector4d to_unit(const GaitParams& p) const;
  void validate() const;  // throws std::invalid_argument
};

struct PVA {
  double pos = 0.0, vel = 0.0, acc = 0.0;
};

// Quintic minimum-jerk interpolation from s0 to s1 over [0, T], evaluated at t.
// Throws std::invalid_argument if T <= 0.
PVA min_jerk(double s0, double s1, double T, double t);

struct SwingTrajConfig {
  double z_max = 0.08;  // m, swing apex height
};

// Uniformly sampled planar reference ((x, y, z), y == 0). Queries are linearly
// interpolated; velocity/acceleration come from central differences of the
// samples; queries beyond the end hold the final sample with zero rates.
struct Trajectory {
  double dt = 1e-3;
  double start_time = 0.0;
  std::vector<Eigen::Vector3d> samples;

  double end_time() const {
    return start_time + dt * static_cast<double>(samples.empty() ? 0 : samples.size() - 1);
  }
  void sample(double t, Eigen::Vector3d& pos, Eigen::Vector3d& vel) const;
  void sample_pva(double t, Eigen::Vector3d& pos, Eigen::Vector3d& vel,
                  Eigen::Vector3d& acc) const;
};

// Swing-foot reference: hold start pose until t_swing_start, then minimum-jerk
// x travel of s_des at s_speed with a two-segment minimum-jerk z arc through
// z_max, then hold the landing pose.
Trajectory gen_swing_traj(double s_des, const GaitParams& p, const SwingTrajConfig& cfg,
                          const Eigen::Vector3d& start_pose, double dt, double horizon);

// CoM reference: LIPM about the stance pivot, pivot switch at
// T_sw_ref = max(t_min, s_des/s_speed + t_swing_start) to min(s_des, s_max),
// frozen at the first post-switch zero crossing of the reference velocity.
Trajectory gen_com_traj(double xdot0, const GaitParams& p, double s_des, double z_nom,
                        double dt, double horizon, double gravity = 9.81);

}  // namespace stepmap
