#include "stepmap/episode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepmap {

void ObjectiveWeights::validate() const {
  if (w_f < 0.0 || w_swing < 0.0 || w_x_mid < 0.0 || w_z < 0.0 || w_tau < 0.0)
    throw std::invalid_argument("objective weights must be non-negative");
}

double torque_integral(const std::vector<Vec5>& torque_log, double t_lo, double t_td,
                       double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("torque_integral: dt must be positive");
  if (t_lo > t_td + 1e-12)
    throw std::invalid_argument("torque_integral: t_lo must not exceed t_td");
  const double log_end = static_cast<double>(torque_log.size()) * dt;
  if (t_lo < -1e-12 || t_td > log_end + 1e-9)
    throw std::invalid_argument("torque_integral: interval not covered by the torque log");

  const int k_lo = static_cast<int>(std::ceil(t_lo / dt - 1e-9));
  double sum = 0.0;
  for (int k = std::max(k_lo, 0); static_cast<double>(k) * dt < t_td - 1e-12; ++k) {
    if (k >= static_cast<int>(torque_log.size())) break;
    sum += torque_log[static_cast<size_t>(k)].squaredNorm();
  }
  return sum * dt;
}

double objective(const EpisodeOutcome& outcome, const InitialCondition& ic,
                 const ObjectiveWeights& w, double t_total, double z_nom) {
  const double miss = ic.s_des - outcome.s_td;
  const double x_off = outcome.x_f - outcome.s_mid;
  return -(w.w_f * (t_total - outcome.t_term) + w.w_swing * miss * miss +
           w.w_x_mid * x_off * x_off + w.w_z * (z_nom - outcome.z_f) +
           w.w_tau * outcome.j_tau);
}

EpisodeOutcome run_episode(const InitialCondition& ic, const GaitParams& p,
                           const EpisodeConfig& cfg) {
  cfg.weights.validate();
  cfg.gains.validate();
  const PlanarBiped model(cfg.biped);
  const double dt = cfg.biped.dt;
  const double t_total = cfg.biped.t_total;
  const int n_ticks = static_cast<int>(std::llround(t_total / dt));

  RobotState state = model.init_standing(ic.xdot0);
  const Vec5 posture_target = state.q;
  const auto [foot0, foot0_vel] = model.swing_foot_state(state);
  const Eigen::Vector3d swing_start(foot0.x(), 0.0, foot0.y());

  const Trajectory com_traj =
      gen_com_traj(ic.xdot0, p, ic.s_des, cfg.biped.z_nom, dt, t_total, cfg.biped.gravity);
  const Trajectory swing_traj =
      gen_swing_traj(ic.s_des, p, cfg.swing, swing_start, dt, t_total);

  EpisodeOutcome out;
  out.t_lo = p.t_swing_start;
  out.s_stance = state.stance_anchor.x();
  out.torque_log.reserve(static_cast<size_t>(n_ticks));
  if (cfg.keep_logs) out.log.reserve(static_cast<size_t>(n_ticks) + 1);

  TerminationStatus term{Termination::Running, 0.0};
  for (int k = 0; k < n_ticks; ++k) {
    const double t = static_cast<double>(k) * dt;

    TaskRef com_ref, swing_ref;
    Eigen::Vector3d pos, vel, acc;
    com_traj.sample_pva(t, pos, vel, acc);
    com_ref.pos = {pos.x(), pos.z()};
    com_ref.vel = {vel.x(), vel.z()};
    com_ref.acc = {acc.x(), acc.z()};
    swing_traj.sample_pva(t, pos, vel, acc);
    swing_ref.pos = {pos.x(), pos.z()};
    swing_ref.vel = {vel.x(), vel.z()};
    swing_ref.acc = {acc.x(), acc.z()};

    const Vec5 tau = solve_torques(model, state, com_ref, swing_ref, posture_target, cfg.gains);

    if (cfg.keep_logs) {
      const Kinematics kin = model.kinematics(state);
      out.log.push_back({t, state.q, state.qd, tau, kin.com, kin.com_jac * state.qd,
                         kin.swing_foot});
    }

    StepEvent event;
    state = model.step(state, tau, dt, &event);
    out.torque_log.push_back(state.tau);

    if (event.touchdown && !out.touchdown) {
      out.touchdown = true;
      out.t_td = t + event.fraction * dt;
      out.s_td = event.x;
    }

    term = model.check_termination(state, static_cast<double>(k + 1) * dt);
    if (term.status != Termination::Running) break;
  }

  out.status = term.status;
  out.t_term = term.t_term;

  // Nominal-high-value policy: a fallen robot's remaining ticks cost the full
  // actuation budget.
  if (out.torque_log.size() < static_cast<size_t>(n_ticks)) {
    out.torque_log.resize(static_cast<size_t>(n_ticks), cfg.biped.torque_limit);
  }

  const auto [com, com_vel] = model.com_state(state);
  out.x_f = com.x();
  out.z_f = com.y();
  if (!out.touchdown) {
    out.t_td = t_total;
    out.s_td = model.swing_foot_state(state).first.x();
  }
  out.s_mid = 0.5 * (out.s_stance + out.s_td);

  const double t_hi = out.touchdown ? out.t_td : t_total;
  out.j_tau = torque_integral(out.torque_log, std::min(out.t_lo, t_hi), t_hi, dt);
  return out;
}

}  // namespace stepmap
