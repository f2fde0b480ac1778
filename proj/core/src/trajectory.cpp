#include "stepmap/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stepmap {

bool ParamBounds::contains(const GaitParams& p, double tol) const {
  const Eigen::Vector4d v = p.as_vector();
  for (int d = 0; d < 4; ++d) {
    if (v[d] < lo[d] - tol || v[d] > hi[d] + tol) return false;
  }
  return true;
}

GaitParams ParamBounds::from_unit(const Eigen::Vector4d& u) const {
  Eigen::Vector4d v;
  for (int d = 0; d < 4; ++d) v[d] = lo[d] + (hi[d] - lo[d]) * u[d];
  return GaitParams::from_vector(v);
}

Eigen::Vector4d ParamBounds::to_unit(const GaitParams& p) const {
  const Eigen::Vector4d v = p.as_vector();
  Eigen::Vector4d u;
  for (int d = 0; d < 4; ++d) u[d] = (v[d] - lo[d]) / (hi[d] - lo[d]);
  return u;
}

void ParamBounds::validate() const {
  for (int d = 0; d < 4; ++d) {
    if (!(lo[d] < hi[d])) throw std::invalid_argument("parameter bounds: lo must be < hi");
  }
}

PVA min_jerk(double s0, double s1, double T, double t) {
  if (T <= 0.0) throw std::invalid_argument("min_jerk: duration must be positive");
  const double u = t / T;
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double d = s1 - s0;
  PVA out;
  out.pos = s0 + d * (10.0 * u3 - 15.0 * u2 * u2 + 6.0 * u2 * u3);
  out.vel = d * (30.0 * u2 - 60.0 * u3 + 30.0 * u2 * u2) / T;
  out.acc = d * (60.0 * u - 180.0 * u2 + 120.0 * u3) / (T * T);
  return out;
}

namespace {

int sample_count(double horizon, double dt) {
  return static_cast<int>(std::llround(horizon / dt)) + 1;
}

}  // namespace

void Trajectory::sample(double t, Eigen::Vector3d& pos, Eigen::Vector3d& vel) const {
  Eigen::Vector3d acc;
  sample_pva(t, pos, vel, acc);
}

void Trajectory::sample_pva(double t, Eigen::Vector3d& pos, Eigen::Vector3d& vel,
                            Eigen::Vector3d& acc) const {
  const int n = static_cast<int>(samples.size());
  if (n == 0) {
    pos.setZero();
    vel.setZero();
    acc.setZero();
    return;
  }
  const double s = (t - start_time) / dt;
  if (s >= static_cast<double>(n - 1)) {
    pos = samples.back();
    vel.setZero();
    acc.setZero();
    return;
  }

  const int k0 = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
  const int k1 = std::min(k0 + 1, n - 1);
  const double w = std::clamp(s - static_cast<double>(k0), 0.0, 1.0);
  pos = (1.0 - w) * samples[static_cast<size_t>(k0)] + w * samples[static_cast<size_t>(k1)];

  auto vel_at = [&](int k) -> Eigen::Vector3d {
    if (n == 1) return Eigen::Vector3d::Zero();
    if (k <= 0) return (samples[1] - samples[0]) / dt;
    if (k >= n - 1) return (samples[static_cast<size_t>(n - 1)] - samples[static_cast<size_t>(n - 2)]) / dt;
    return (samples[static_cast<size_t>(k + 1)] - samples[static_cast<size_t>(k - 1)]) / (2.0 * dt);
  };
  auto acc_at = [&](int k) -> Eigen::Vector3d {
    if (k <= 0 || k >= n - 1) return Eigen::Vector3d::Zero();
    return (samples[static_cast<size_t>(k + 1)] - 2.0 * samples[static_cast<size_t>(k)] +
            samples[static_cast<size_t>(k - 1)]) /
           (dt * dt);
  };
  vel = (1.0 - w) * vel_at(k0) + w * vel_at(k1);
  acc = (1.0 - w) * acc_at(k0) + w * acc_at(k1);
}

Trajectory gen_swing_traj(double s_des, const GaitParams& p, const SwingTrajConfig& cfg,
                          const Eigen::Vector3d& start_pose, double dt, double horizon) {
  if (s_des <= 0.0) throw std::invalid_argument("gen_swing_traj: s_des must be positive");
  if (dt <= 0.0 || horizon < dt) throw std::invalid_argument("gen_swing_traj: bad sampling");

  const double T_sw = s_des / p.s_speed;
  const double t0 = p.t_swing_start;
  const double t1 = t0 + T_sw;
  const double half = T_sw / 2.0;

  Trajectory traj;
  traj.dt = dt;
  traj.start_time = 0.0;
  const int n = sample_count(horizon, dt);
  traj.samples.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    Eigen::Vector3d s = start_pose;
    s.y() = 0.0;
    if (t >= t1) {
      s.x() = start_pose.x() + s_des;
      s.z() = 0.0;
    } else if (t > t0) {
      s.x() = start_pose.x() + min_jerk(0.0, s_des, T_sw, t - t0).pos;
      if (t <= t0 + half) {
        s.z() = min_jerk(start_pose.z(), cfg.z_max, half, t - t0).pos;
      } else {
        s.z() = min_jerk(cfg.z_max, 0.0, half, t - t0 - half).pos;
      }
    }
    traj.samples.push_back(s);
  }
  return traj;
}

Trajectory gen_com_traj(double xdot0, const GaitParams& p, double s_des, double z_nom,
                        double dt, double horizon, double gravity) {
  if (xdot0 < 0.0) throw std::invalid_argument("gen_com_traj: xdot0 must be non-negative");
  if (dt <= 0.0 || horizon < dt) throw std::invalid_argument("gen_com_traj: bad sampling");

  const double omega = std::sqrt(gravity / z_nom);
  const double T_sw = std::max(p.t_min, s_des / p.s_speed + p.t_swing_start);
  const double pivot = std::min(s_des, p.s_max);

  // State at the pivot switch (continuity of position and velocity).
  const double x1 = (xdot0 / omega) * std::sinh(omega * T_sw);
  const double v1 = xdot0 * std::cosh(omega * T_sw);

  // Post-switch LIPM about the new pivot: x(tau) = pivot + A cosh + (B) sinh.
  const double A = x1 - pivot;
  const double B = v1 / omega;
  // Velocity zero crossing: tanh(omega*tau) = -B/A, defined when |B| < |A|.
  double t_freeze = std::numeric_limits<double>::infinity();
  double x_freeze = 0.0;
  if (std::abs(B) < std::abs(A)) {
    const double tau = std::atanh(-B / A) / omega;
    if (tau >= 0.0) {
      t_freeze = T_sw + tau;
      x_freeze = pivot + A * std::cosh(omega * tau) + B * std::sinh(omega * tau);
    }
  }

  Trajectory traj;
  traj.dt = dt;
  traj.start_time = 0.0;
  const int n = sample_count(horizon, dt);
  traj.samples.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    double x;
    if (t >= t_freeze) {
      x = x_freeze;
    } else if (t < T_sw) {
      x = (xdot0 / omega) * std::sinh(omega * t);
    } else {
      const double tau = t - T_sw;
      x = pivot + A * std::cosh(omega * tau) + B * std::sinh(omega * tau);
    }
    traj.samples.emplace_back(x, 0.0, z_nom);
  }
  return traj;
}

}  // namespace stepmap
