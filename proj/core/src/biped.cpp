#include "stepmap/biped.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepmap {

namespace {

constexpr double kBaumgarte = 20.0;  // 1/s, contact drift stabilization
constexpr double kHalfPi = 1.5707963267948966;

// Absolute link angle = offset + sum of q[0..link]; stance chain and torso
// point up at q = 0, the swing chain hangs down.
constexpr std::array<double, 5> kAngleOffset{kHalfPi, kHalfPi, kHalfPi, -kHalfPi, -kHalfPi};

struct Segment {
  double length;
  int link;
};

}  // namespace

void BipedConfig::validate() const {
  auto check_link = [](const LinkParams& l, const char* name) {
    if (!(l.length > 0.0 && l.mass > 0.0 && l.inertia > 0.0))
      throw std::invalid_argument(std::string("biped config: non-positive ") + name +
                                  " parameters");
  };
  check_link(torso, "torso");
  check_link(thigh, "thigh");
  check_link(shank, "shank");
  for (int i = 0; i < kNumJoints; ++i) {
    if (!(torque_limit[i] > 0.0))
      throw std::invalid_argument("biped config: torque limits must be positive");
    if (!(velocity_limit[i] > 0.0))
      throw std::invalid_argument("biped config: velocity limits must be positive");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("biped config: dt must be positive");
  if (!(t_total >= dt)) throw std::invalid_argument("biped config: t_total must be >= dt");
  if (!(gravity > 0.0)) throw std::invalid_argument("biped config: gravity must be positive");
  if (!(z_nom > 0.0 && z_nom < max_standing_com_height()))
    throw std::invalid_argument("biped config: z_nom not reachable by the kinematic chain");
  if (!(velocity_threshold > 0.0 && settle_threshold > 0.0))
    throw std::invalid_argument("biped config: thresholds must be positive");
  if (!(fall_height > 0.0 && fall_height < z_nom))
    throw std::invalid_argument("biped config: fall height must lie in (0, z_nom)");
  if (swing_start_height < 0.0)
    throw std::invalid_argument("biped config: swing start height must be non-negative");
}

double BipedConfig::max_standing_com_height() const {
  const double leg = shank.length + thigh.length;
  const double num = 2.0 * shank.mass * (shank.length / 2.0) +
                     2.0 * thigh.mass * (shank.length + thigh.length / 2.0) +
                     torso.mass * (leg + torso.length / 2.0);
  return num / total_mass();
}

PlanarBiped::PlanarBiped(BipedConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  link_length_ = {cfg_.shank.length, cfg_.thigh.length, cfg_.torso.length, cfg_.thigh.length,
                  cfg_.shank.length};
  link_mass_ = {cfg_.shank.mass, cfg_.thigh.mass, cfg_.torso.mass, cfg_.thigh.mass,
                cfg_.shank.mass};
  link_inertia_ = {cfg_.shank.inertia, cfg_.thigh.inertia, cfg_.torso.inertia,
                   cfg_.thigh.inertia, cfg_.shank.inertia};
}

Kinematics PlanarBiped::kinematics(const RobotState& state) const {
  Kinematics kin;
  std::array<double, 5> cth, sth, thd;
  double cum_q = 0.0, cum_qd = 0.0;
  for (int l = 0; l < 5; ++l) {
    cum_q += state.q[l];
    cum_qd += state.qd[l];
    kin.theta[l] = kAngleOffset[l] + cum_q;
    cth[l] = std::cos(kin.theta[l]);
    sth[l] = std::sin(kin.theta[l]);
    thd[l] = cum_qd;
  }

  const double Lsh = link_length_[0];
  const double Lth = link_length_[1];
  const double Lto = link_length_[2];

  auto eval_chain = [&](const Segment* segs, int n, Eigen::Vector2d& pos, Jac2x5& jac,
                        Eigen::Vector2d& vp) {
    pos = state.stance_anchor;
    jac.setZero();
    vp.setZero();
    for (int k = 0; k < n; ++k) {
      const double len = segs[k].length;
      const int l = segs[k].link;
      const Eigen::Vector2d e(cth[l], sth[l]);
      const Eigen::Vector2d ep(-sth[l], cth[l]);  // d e / d theta
      pos += len * e;
      for (int j = 0; j <= l; ++j) jac.col(j) += len * ep;
      vp += -len * thd[l] * thd[l] * e;
    }
  };

  const Segment chain_shank_st[] = {{Lsh / 2, 0}};
  const Segment chain_thigh_st[] = {{Lsh, 0}, {Lth / 2, 1}};
  const Segment chain_torso[] = {{Lsh, 0}, {Lth, 1}, {Lto / 2, 2}};
  const Segment chain_thigh_sw[] = {{Lsh, 0}, {Lth, 1}, {Lth / 2, 3}};
  const Segment chain_shank_sw[] = {{Lsh, 0}, {Lth, 1}, {Lth, 3}, {Lsh / 2, 4}};
  const Segment chain_foot_sw[] = {{Lsh, 0}, {Lth, 1}, {Lth, 3}, {Lsh, 4}};

  eval_chain(chain_shank_st, 1, kin.link_com[0], kin.link_jac[0], kin.link_vp[0]);
  eval_chain(chain_thigh_st, 2, kin.link_com[1], kin.link_jac[1], kin.link_vp[1]);
  eval_chain(chain_torso, 3, kin.link_com[2], kin.link_jac[2], kin.link_vp[2]);
  eval_chain(chain_thigh_sw, 3, kin.link_com[3], kin.link_jac[3], kin.link_vp[3]);
  eval_chain(chain_shank_sw, 4, kin.link_com[4], kin.link_jac[4], kin.link_vp[4]);
  eval_chain(chain_foot_sw, 4, kin.swing_foot, kin.swing_foot_jac, kin.swing_foot_vp);

  const double m_total = cfg_.total_mass();
  kin.com.setZero();
  kin.com_jac.setZero();
  kin.com_vp.setZero();
  for (int l = 0; l < 5; ++l) {
    const double w = link_mass_[l] / m_total;
    kin.com += w * kin.link_com[l];
    kin.com_jac += w * kin.link_jac[l];
    kin.com_vp += w * kin.link_vp[l];
  }
  return kin;
}

Mat5 PlanarBiped::mass_matrix(const RobotState& state) const {
  const Kinematics kin = kinematics(state);
  Mat5 M = Mat5::Zero();
  for (int l = 0; l < 5; ++l) {
    M += link_mass_[l] * kin.link_jac[l].transpose() * kin.link_jac[l];
    // Rotational part: absolute angle of link l depends on q[0..l] with unit
    // coefficients, so the contribution is a ones-block.
    M.topLeftCorner(l + 1, l + 1).array() += link_inertia_[l];
  }
  return M;
}

Vec5 PlanarBiped::bias_forces(const RobotState& state) const {
  const Kinematics kin = kinematics(state);
  Vec5 h = Vec5::Zero();
  for (int l = 0; l < 5; ++l) {
    h += link_mass_[l] * kin.link_jac[l].transpose() * kin.link_vp[l];
    h += link_mass_[l] * cfg_.gravity * kin.link_jac[l].row(1).transpose();
  }
  return h;
}

Eigen::Vector2d PlanarBiped::contact_rhs(const RobotState& state, const Kinematics& kin) const {
  const Eigen::Vector2d foot_vel = kin.swing_foot_jac * state.qd;
  const Eigen::Vector2d drift = kin.swing_foot - state.swing_anchor;
  return -kin.swing_foot_vp - 2.0 * kBaumgarte * foot_vel - kBaumgarte * kBaumgarte * drift;
}

Vec5 PlanarBiped::forward_dynamics(const RobotState& state, const Vec5& tau) const {
  const Mat5 M = mass_matrix(state);
  const Vec5 h = bias_forces(state);
  Eigen::LLT<Mat5> llt(M);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("forward dynamics: mass matrix not positive definite");
  if (state.contact == ContactMode::SwingAirborne) {
    return llt.solve(tau - h);
  }
  const Kinematics kin = kinematics(state);
  const Jac2x5& J = kin.swing_foot_jac;
  const Vec5 free_qdd = llt.solve(tau - h);
  const Eigen::Matrix<double, 5, 2> MiJt = llt.solve(J.transpose());
  const Eigen::Matrix2d A = J * MiJt;
  const Eigen::Vector2d b = contact_rhs(state, kin);
  const Eigen::Vector2d lambda = A.ldlt().solve(b - J * free_qdd);
  return free_qdd + MiJt * lambda;
}

Vec5 PlanarBiped::inverse_dynamics(const RobotState& state, const Vec5& qdd) const {
  const Mat5 M = mass_matrix(state);
  const Vec5 h = bias_forces(state);
  const Vec5 tau0 = M * qdd + h;
  if (state.contact == ContactMode::SwingAirborne) return tau0;
  // Double support: torques are defined up to contact forces; return the
  // minimum-norm member of the family tau = tau0 - J^T lambda.
  const Kinematics kin = kinematics(state);
  const Jac2x5& J = kin.swing_foot_jac;
  const Eigen::Matrix2d JJt = J * J.transpose();
  const Eigen::Vector2d lambda = JJt.ldlt().solve(J * tau0);
  return tau0 - J.transpose() * lambda;
}

Vec5 PlanarBiped::clamp_torques(const Vec5& tau) const {
  Vec5 out;
  for (int i = 0; i < kNumJoints; ++i)
    out[i] = std::clamp(tau[i], -cfg_.torque_limit[i], cfg_.torque_limit[i]);
  return out;
}

RobotState PlanarBiped::step(const RobotState& state, const Vec5& tau, double dt,
                             StepEvent* event) const {
  if (event) *event = StepEvent{};
  const Vec5 tau_applied = clamp_torques(tau);
  const Vec5 qdd = forward_dynamics(state, tau_applied);

  RobotState next = state;
  next.qd = state.qd + qdd * dt;
  next.q = state.q + next.qd * dt;
  next.qdd = qdd;
  next.tau = tau_applied;

  if (state.contact == ContactMode::SwingAirborne) {
    const Eigen::Vector2d foot_before = kinematics(state).swing_foot;
    const Kinematics kin_after = kinematics(next);
    const Eigen::Vector2d foot_after = kin_after.swing_foot;
    const double vz_after = (kin_after.swing_foot_jac * next.qd)[1];
    if (foot_after.y() <= 0.0 && vz_after < 0.0) {
      const double z0 = foot_before.y();
      const double z1 = foot_after.y();
      const double f = (z0 > z1) ? std::clamp(z0 / (z0 - z1), 0.0, 1.0) : 1.0;
      const double td_x = foot_before.x() + f * (foot_after.x() - foot_before.x());

      next.contact = ContactMode::DoubleSupport;
      next.swing_anchor = Eigen::Vector2d(td_x, 0.0);

      // Inelastic impact: project qd onto the contact-consistent subspace.
      const Mat5 M = mass_matrix(next);
      Eigen::LLT<Mat5> llt(M);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("impact map: mass matrix not positive definite");
      const Jac2x5& J = kin_after.swing_foot_jac;
      const Eigen::Matrix<double, 5, 2> MiJt = llt.solve(J.transpose());
      const Eigen::Matrix2d A = J * MiJt;
      const Eigen::Vector2d impulse = A.ldlt().solve(J * next.qd);
      next.qd -= MiJt * impulse;

      if (event) {
        event->touchdown = true;
        event->fraction = f;
        event->x = td_x;
      }
    }
  }
  return next;
}

std::pair<Eigen::Vector2d, Eigen::Vector2d> PlanarBiped::com_state(
    const RobotState& state) const {
  const Kinematics kin = kinematics(state);
  return {kin.com, kin.com_jac * state.qd};
}

std::pair<Eigen::Vector2d, Eigen::Vector2d> PlanarBiped::swing_foot_state(
    const RobotState& state) const {
  const Kinematics kin = kinematics(state);
  return {kin.swing_foot, kin.swing_foot_jac * state.qd};
}

Jac2x5 PlanarBiped::point_jacobian(const RobotState& state, TaskPoint point) const {
  const Kinematics kin = kinematics(state);
  return point == TaskPoint::Com ? kin.com_jac : kin.swing_foot_jac;
}

RobotState PlanarBiped::init_standing(double xdot0) const {
  if (xdot0 < 0.0) throw std::invalid_argument("init_standing: xdot0 must be non-negative");

  const std::array<Vec5, 3> seeds{Vec5{-0.25, 0.50, -0.25, 0.25, -0.58},
                                  Vec5{-0.15, 0.30, -0.15, 0.18, -0.40},
                                  Vec5{-0.35, 0.70, -0.35, 0.32, -0.75}};

  RobotState state;
  bool solved = false;
  for (const Vec5& seed : seeds) {
    state = RobotState{};
    state.q = seed;
    for (int iter = 0; iter < 80; ++iter) {
      const Kinematics kin = kinematics(state);
      Vec5 r;
      r[0] = kin.com.x();
      r[1] = kin.com.y() - cfg_.z_nom;
      r[2] = kin.swing_foot.x();
      r[3] = kin.swing_foot.y() - cfg_.swing_start_height;
      r[4] = state.q[0] + state.q[1] + state.q[2];  // torso upright
      if (r.cwiseAbs().maxCoeff() < 1e-13) {
        solved = true;
        break;
      }
      Mat5 J;
      J.row(0) = kin.com_jac.row(0);
      J.row(1) = kin.com_jac.row(1);
      J.row(2) = kin.swing_foot_jac.row(0);
      J.row(3) = kin.swing_foot_jac.row(1);
      J.row(4) << 1.0, 1.0, 1.0, 0.0, 0.0;
      // Damped Newton step; the damping only matters near singular postures.
      const Mat5 JtJ = J.transpose() * J + 1e-12 * Mat5::Identity();
      const Vec5 dq = JtJ.ldlt().solve(J.transpose() * r);
      state.q -= dq;
      if (!state.q.allFinite()) break;
    }
    if (solved) break;
  }
  if (!solved)
    throw std::runtime_error("init_standing: IK failed to reach the standing posture");

  const Kinematics kin = kinematics(state);
  const Jac2x5& Jc = kin.com_jac;
  const Eigen::Matrix2d JJt = Jc * Jc.transpose();
  const Eigen::Vector2d target(xdot0, 0.0);
  state.qd = Jc.transpose() * JJt.ldlt().solve(target);
  state.qdd.setZero();
  state.tau.setZero();
  state.contact = ContactMode::SwingAirborne;
  state.stance_anchor.setZero();
  state.swing_anchor.setZero();
  return state;
}

TerminationStatus PlanarBiped::check_termination(const RobotState& state, double t) const {
  const double speed = state.qd.norm();
  if (speed > cfg_.velocity_threshold) return {Termination::FellVelocity, t};
  const Kinematics kin = kinematics(state);
  if (kin.com.y() < cfg_.fall_height) return {Termination::FellHeight, t};
  if (t >= cfg_.t_total - 1e-12) {
    if (state.contact == ContactMode::DoubleSupport && speed < cfg_.settle_threshold)
      return {Termination::Success, cfg_.t_total};
    return {Termination::TimeoutUnsettled, cfg_.t_total};
  }
  return {Termination::Running, t};
}

double PlanarBiped::kinetic_energy(const RobotState& state) const {
  return 0.5 * state.qd.dot(mass_matrix(state) * state.qd);
}

double PlanarBiped::potential_energy(const RobotState& state) const {
  const Kinematics kin = kinematics(state);
  double pe = 0.0;
  for (int l = 0; l < 5; ++l) pe += link_mass_[l] * cfg_.gravity * kin.link_com[l].y();
  return pe;
}

}  // namespace stepmap
