#include "stepmap/controller.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <stdexcept>

namespace stepmap {

namespace {

// Damped pseudoinverse via SVD: sigma / (sigma^2 + lambda^2). Directions with
// sigma below the truncation floor are dropped entirely: they arise when a
// task is already fully consumed by higher-priority levels, where damping
// alone would amplify projection noise (sigma ~ lambda^2) to O(1) gains.
Eigen::MatrixXd damped_pinv(const Eigen::MatrixXd& A, double lambda) {
  constexpr double kTruncation = 1e-8;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::VectorXd inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    inv[i] = (s[i] > kTruncation) ? s[i] / (s[i] * s[i] + lambda * lambda) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

struct TaskRow {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

}  // namespace

void ControllerGains::validate() const {
  if (!(kp_swing > 0.0 && kd_swing > 0.0 && kp_com > 0.0 && kd_com > 0.0 &&
        kp_posture > 0.0 && kd_posture > 0.0))
    throw std::invalid_argument("controller gains: kp and kd must be positive");
  if (!(pinv_damping > 0.0))
    throw std::invalid_argument("controller gains: pseudoinverse damping must be positive");
  int swing_rank = -1, com_rank = -1;
  for (size_t i = 0; i < priority.size(); ++i) {
    if (priority[i] == ControlTask::SwingFoot) swing_rank = static_cast<int>(i);
    if (priority[i] == ControlTask::Com) com_rank = static_cast<int>(i);
  }
  if (swing_rank < 0 || com_rank < 0)
    throw std::invalid_argument("controller gains: priority must list swing-foot and CoM tasks");
  if (swing_rank > com_rank)
    throw std::invalid_argument(
        "controller gains: swing-foot task must not rank below the CoM task");
}

Vec5 solve_accelerations(const PlanarBiped& model, const RobotState& state,
                         const TaskRef& com_ref, const TaskRef& swing_ref,
                         const Vec5& posture_target, const ControllerGains& gains) {
  gains.validate();
  const Kinematics kin = model.kinematics(state);

  std::vector<TaskRow> levels;
  levels.reserve(gains.priority.size() + 1);

  // The pinned swing foot is a hard constraint ahead of every task.
  if (state.contact == ContactMode::DoubleSupport) {
    TaskRow row;
    row.A = kin.swing_foot_jac;
    row.b = model.contact_rhs(state, kin);
    levels.push_back(std::move(row));
  }

  for (ControlTask task : gains.priority) {
    TaskRow row;
    switch (task) {
      case ControlTask::SwingFoot: {
        const Eigen::Vector2d pos = kin.swing_foot;
        const Eigen::Vector2d vel = kin.swing_foot_jac * state.qd;
        const Eigen::Vector2d a_star = swing_ref.acc + gains.kd_swing * (swing_ref.vel - vel) +
                                       gains.kp_swing * (swing_ref.pos - pos);
        row.A = kin.swing_foot_jac;
        row.b = a_star - kin.swing_foot_vp;
        break;
      }
      case ControlTask::Com: {
        const Eigen::Vector2d pos = kin.com;
        const Eigen::Vector2d vel = kin.com_jac * state.qd;
        const Eigen::Vector2d a_star = com_ref.acc + gains.kd_com * (com_ref.vel - vel) +
                                       gains.kp_com * (com_ref.pos - pos);
        row.A = kin.com_jac;
        row.b = a_star - kin.com_vp;
        break;
      }
      case ControlTask::Posture: {
        row.A = Eigen::MatrixXd::Identity(kNumJoints, kNumJoints);
        row.b = gains.kp_posture * (posture_target - state.q) - gains.kd_posture * state.qd;
        break;
      }
    }
    levels.push_back(std::move(row));
  }

  Eigen::VectorXd qdd = Eigen::VectorXd::Zero(kNumJoints);
  Eigen::MatrixXd N = Eigen::MatrixXd::Identity(kNumJoints, kNumJoints);
  for (const TaskRow& level : levels) {
    const Eigen::MatrixXd An = level.A * N;
    const Eigen::MatrixXd An_pinv = damped_pinv(An, gains.pinv_damping);
    qdd += An_pinv * (level.b - level.A * qdd);
    N -= An_pinv * An;
  }
  return qdd;
}

Vec5 solve_torques(const PlanarBiped& model, const RobotState& state, const TaskRef& com_ref,
                   const TaskRef& swing_ref, const Vec5& posture_target,
                   const ControllerGains& gains) {
  const Vec5 qdd = solve_accelerations(model, state, com_ref, swing_ref, posture_target, gains);
  return model.clamp_torques(model.inverse_dynamics(state, qdd));
}

std::pair<Eigen::Vector2d, Eigen::Vector2d> task_error(const PlanarBiped& model,
                                                       const RobotState& state,
                                                       const Eigen::Vector2d& x_ref,
                                                       const Eigen::Vector2d& v_ref,
                                                       TaskPoint task) {
  const Kinematics kin = model.kinematics(state);
  const Eigen::Vector2d pos = (task == TaskPoint::Com) ? kin.com : kin.swing_foot;
  const Jac2x5& jac = (task == TaskPoint::Com) ? kin.com_jac : kin.swing_foot_jac;
  return {x_ref - pos, v_ref - jac * state.qd};
}

}  // namespace stepmap
