#pragma once

#include <Eigen/Dense>
#include <array>
#include <utility>

namespace stepmap {

inline constexpr int kNumJoints = 5;

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Jac2x5 = Eigen::Matrix<double, 2, 5>;

struct LinkParams {
  double length = 0.0;   // m
  double mass = 0.0;     // kg
  double inertia = 0.0;  // kg m^2 about the link CoM
};

// Planar 5-link biped: stance shank/thigh, torso, swing thigh/shank. The stance
// foot is welded to the ground; joints are [stance ankle, stance knee,
// stance hip, swing hip, swing knee], all revolute about the world y axis.
struct BipedConfig {
  LinkParams torso{0.90, 50.0, 50.0 * 0.90 * 0.90 / 12.0};
  LinkParams thigh{0.45, 10.0, 10.0 * 0.45 * 0.45 / 12.0};
  LinkParams shank{0.45, 10.0, 10.0 * 0.45 * 0.45 / 12.0};
  Vec5 torque_limit{120.0, 300.0, 250.0, 250.0, 300.0};   // N m
  Vec5 velocity_limit{25.0, 25.0, 25.0, 25.0, 25.0};      // rad/s (informational)
  double z_nom = 0.925;              // m, nominal CoM height
  double dt = 1e-3;                  // s, integration step (1 kHz)
  double t_total = 7.0;              // s, episode horizon
  double gravity = 9.81;             // m/s^2
  double velocity_threshold = 1e6;   // rad/s, ||qd|| fall test
  double fall_height = 0.4;          // m, CoM-height fall test
  double settle_threshold = 0.5;     // rad/s, success requires ||qd|| below
  double swing_start_height = 0.01;  // m, initial swing-foot clearance

  void validate() const;  // throws std::invalid_argument on invariant violation
  double total_mass() const { return torso.mass + 2.0 * thigh.mass + 2.0 * shank.mass; }
  // CoM height with both legs straight and the torso vertical; upper bound for
  // feasible z_nom.
  double max_standing_com_height() const;
};

enum class ContactMode { SwingAirborne, DoubleSupport };

struct RobotState {
  Vec5 q = Vec5::Zero();
  Vec5 qd = Vec5::Zero();
  Vec5 qdd = Vec5::Zero();  // last computed accelerations
  Vec5 tau = Vec5::Zero();  // last applied (clamped) torques
  ContactMode contact = ContactMode::SwingAirborne;
  Eigen::Vector2d stance_anchor = Eigen::Vector2d::Zero();
  Eigen::Vector2d swing_anchor = Eigen::Vector2d::Zero();  // valid in double support
};

enum class Termination { Running, Success, FellVelocity, FellHeight, TimeoutUnsettled };

struct TerminationStatus {
  Termination status = Termination::Running;
  double t_term = 0.0;
};

// Touchdown report for one integration step; fraction locates the ground
// crossing inside the step for sub-sample event timing.
struct StepEvent {
  bool touchdown = false;
  double fraction = 0.0;  // in [0, 1]
  double x = 0.0;         // interpolated foot x at crossing
};

enum class TaskPoint { Com, SwingFoot };

// Kinematic snapshot: absolute link angles, per-link CoM frames, the swing
// foot, and the whole-body CoM, each with Jacobian and velocity-product
// acceleration (Jdot*qd).
struct Kinematics {
  std::array<double, 5> theta{};
  std::array<Eigen::Vector2d, 5> link_com{};
  std::array<Jac2x5, 5> link_jac{};
  std::array<Eigen::Vector2d, 5> link_vp{};
  Eigen::Vector2d swing_foot = Eigen::Vector2d::Zero();
  Jac2x5 swing_foot_jac = Jac2x5::Zero();
  Eigen::Vector2d swing_foot_vp = Eigen::Vector2d::Zero();
  Eigen::Vector2d com = Eigen::Vector2d::Zero();
  Jac2x5 com_jac = Jac2x5::Zero();
  Eigen::Vector2d com_vp = Eigen::Vector2d::Zero();
};

class PlanarBiped {
 public:
  explicit PlanarBiped(BipedConfig cfg);

  const BipedConfig& config() const { return cfg_; }

  Kinematics kinematics(const RobotState& state) const;
  Mat5 mass_matrix(const RobotState& state) const;
  // h(q, qd): velocity-product plus gravity generalized forces, M qdd + h = tau.
  Vec5 bias_forces(const RobotState& state) const;

  // Constraint-consistent accelerations for the active contact mode.
  Vec5 forward_dynamics(const RobotState& state, const Vec5& tau) const;
  // Torques realizing qdd under the active contact mode (minimum-norm torques
  // over the contact-force family in double support).
  Vec5 inverse_dynamics(const RobotState& state, const Vec5& qdd) const;

  // Baumgarte-stabilized swing-anchor constraint: J qdd = contact_rhs.
  Eigen::Vector2d contact_rhs(const RobotState& state, const Kinematics& kin) const;

  // Semi-implicit Euler step with torque clamping and touchdown detection.
  RobotState step(const RobotState& state, const Vec5& tau, double dt,
                  StepEvent* event = nullptr) const;

  std::pair<Eigen::Vector2d, Eigen::Vector2d> com_state(const RobotState& state) const;
  std::pair<Eigen::Vector2d, Eigen::Vector2d> swing_foot_state(const RobotState& state) const;
  Jac2x5 point_jacobian(const RobotState& state, TaskPoint point) const;

  // Standing posture: CoM above the stance foot at z_nom, swing foot 1 cm above
  // ground at x = 0, torso vertical; qd is the minimum-norm solution of
  // J_com qd = (xdot0, 0). Throws std::runtime_error on IK failure.
  RobotState init_standing(double xdot0) const;

  TerminationStatus check_termination(const RobotState& state, double t) const;

  double kinetic_energy(const RobotState& state) const;
  double potential_energy(const RobotState& state) const;

  Vec5 clamp_torques(const Vec5& tau) const;

 private:
  BipedConfig cfg_;
  std::array<double, 5> link_length_{};
  std::array<double, 5> link_mass_{};
  std::array<double, 5> link_inertia_{};
};

}  // namespace stepmap
