#pragma once

#include <Eigen/Core>
#include <vector>

#include "stepmap/biped.hpp"

namespace stepmap {

enum class ControlTask { SwingFoot, Com, Posture };

// PD gains and strict priority order; swing foot must never rank below the
// CoM task.
struct ControllerGains {
  double kp_swing = 100.0;  // 1/s^2
  double kd_swing = 20.0;   // 1/s
  double kp_com = 100.0;
  double kd_com = 20.0;
  double kp_posture = 25.0;
  double kd_posture = 10.0;
  double pinv_damping = 1e-6;  // damped pseudoinverse regularization
  std::vector<ControlTask> priority{ControlTask::SwingFoot, ControlTask::Com,
                                    ControlTask::Posture};

  void validate() const;  // throws std::invalid_argument
};

// Planar task reference (x, z) with feedforward acceleration.
struct TaskRef {
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d vel = Eigen::Vector2d::Zero();
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
};

// Lexicographic task-space inverse dynamics: desired accelerations per task,
// solved by successive nullspace projection (contact constraint first in
// double support), mapped to torques and clamped to limits. Stateless.
Vec5 solve_torques(const PlanarBiped& model, const RobotState& state, const TaskRef& com_ref,
                   const TaskRef& swing_ref, const Vec5& posture_target,
                   const ControllerGains& gains);

// Desired joint accelerations before inverse dynamics (exposed for the
// priority tests).
Vec5 solve_accelerations(const PlanarBiped& model, const RobotState& state,
                         const TaskRef& com_ref, const TaskRef& swing_ref,
                         const Vec5& posture_target, const ControllerGains& gains);

// World-frame (position, velocity) error of the named task point.
std::pair<Eigen::Vector2d, Eigen::Vector2d> task_error(const PlanarBiped& model,
                                                       const RobotState& state,
                                                       const Eigen::Vector2d& x_ref,
                                                       const Eigen::Vector2d& v_ref,
                                                       TaskPoint task);

}  // namespace stepmap
