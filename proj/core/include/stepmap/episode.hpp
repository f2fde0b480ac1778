#pragma once

#include <vector>

#include "stepmap/biped.hpp"
#include "stepmap/controller.hpp"
#include "stepmap/trajectory.hpp"

namespace stepmap {

// One (initial CoM velocity, desired step position) pair.
struct InitialCondition {
  double xdot0 = 0.0;  // m/s
  double s_des = 0.0;  // m
};

struct ObjectiveWeights {
  double w_f = 0.001;      // failure (early termination) time
  double w_swing = 50.0;   // squared touchdown position miss
  double w_x_mid = 1.0;    // squared final-CoM offset from the mid-feet target
  double w_z = 1.0;        // final CoM height drop (linear, as printed)
  double w_tau = 0.0002;   // torque-squared integral

  void validate() const;  // throws std::invalid_argument on negative weights
};

struct EpisodeConfig {
  BipedConfig biped;
  ControllerGains gains;
  SwingTrajConfig swing;
  ObjectiveWeights weights;
  bool keep_logs = false;
};

struct EpisodeOutcome {
  Termination status = Termination::Running;
  double t_term = 0.0;   // s
  double t_lo = 0.0;     // s, commanded swing start
  double t_td = 0.0;     // s, touchdown (t_total when no touchdown happened)
  bool touchdown = false;
  double s_td = 0.0;     // m, touchdown x (final swing-foot x when airborne)
  double s_stance = 0.0; // m, stance-foot x
  double s_mid = 0.0;    // m, midpoint target between stance and touchdown feet
  double x_f = 0.0;      // m, final CoM x
  double z_f = 0.0;      // m, final CoM height
  double j_tau = 0.0;    // N^2 m^2 s, swing-phase torque-squared integral

  // One entry per control tick over the full horizon; entries after an early
  // termination hold the per-joint torque limits (the nominal-high-value fill).
  std::vector<Vec5> torque_log;

  struct LogRow {
    double t;
    Vec5 q, qd, tau;
    Eigen::Vector2d com, com_vel, foot;
  };
  std::vector<LogRow> log;  // populated only when keep_logs is set
};

// Runs one full stepping episode. Episode failure is a valid outcome; only
// configuration errors throw.
EpisodeOutcome run_episode(const InitialCondition& ic, const GaitParams& p,
                           const EpisodeConfig& cfg);

// Left-Riemann sum of sum_i tau_i^2 over samples in [t_lo, t_td). Throws
// std::invalid_argument if the interval is not covered by the log.
double torque_integral(const std::vector<Vec5>& torque_log, double t_lo, double t_td,
                       double dt);

// The episode score J (maximization form; every term enters negatively).
double objective(const EpisodeOutcome& outcome, const InitialCondition& ic,
                 const ObjectiveWeights& w, double t_total, double z_nom);

}  // namespace stepmap
