#pragma once

// Desired end-effector trajectory and the pose-feedback joint-rate laws for
// the mission arm (end-effector tracking) and the balance arm (base
// stabilization through momentum exchange).

#include <utility>

#include "ffsr/geometry.hpp"
#include "ffsr/robot_model.hpp"

namespace ffsr {

enum class FeedbackMode { none, proportional, predefined_time };

enum class PhiForm {
  canonical,      // exp(|x|^m) |x|^(1-m) x/|x| / (m T_c): settles before T_c
  paper_literal,  // exp(|x|^m) x/|x| / (m T_c)
};

struct PlannerParams {
  double m = 0.1;
  double T_c = 3.0;                // s
  FeedbackMode feedback_mode = FeedbackMode::predefined_time;
  double k_p = 0.25;               // 1/s, proportional mode only
  PhiForm phi_form = PhiForm::canonical;
  double deadband = 1e-9;
  DampingParams damping;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Predefined-time feedback term phi(x; T_c, m).
Eigen::VectorXd phi(const Eigen::Ref<const Eigen::VectorXd>& x, double m, double T_c,
                    PhiForm form = PhiForm::canonical, double deadband = 1e-9);

template <int N>
Eigen::Matrix<double, N, 1> phi(const Eigen::Matrix<double, N, 1>& x, double m, double T_c,
                                PhiForm form = PhiForm::canonical, double deadband = 1e-9) {
  return phi(Eigen::Ref<const Eigen::VectorXd>(x), m, T_c, form, deadband);
}

/// Feedback term selected by `params.feedback_mode` (zero, k_p e or phi(e)).
Vector6d feedback(const Vector6d& e, const PlannerParams& params);

/// Trapezoidal speed profile with symmetric ramps; integrates to path_length.
double trapezoid_profile(double path_length, double total_time, double ramp_time, double t);

/// Path fraction covered at time t, in [0, 1]; the profile integral over L.
double trapezoid_fraction(double total_time, double ramp_time, double t);

/// Straight-line position and constant-axis attitude interpolation from
/// start to goal, sharing one trapezoidal timing law.
class DesiredTrajectory {
 public:
  DesiredTrajectory(const Posed& start, const Posed& goal, double total_time, double ramp_time);

  const Posed& start() const { return start_; }
  const Posed& goal() const { return goal_; }
  double total_time() const { return total_time_; }
  double ramp_time() const { return ramp_time_; }
  double path_length() const { return (goal_.position - start_.position).norm(); }
  double rotation_angle() const { return rotation_.norm(); }

  /// Pose and twist at t; t is clamped to [0, total_time].
  std::pair<Posed, Twistd> at(double t) const;

 private:
  Posed start_;
  Posed goal_;
  double total_time_;
  double ramp_time_;
  Vector3d rotation_;  // rotation vector carrying start attitude to goal attitude
};

std::pair<Posed, Twistd> desired_pose_twist(const DesiredTrajectory& traj, double t);

/// Base twist that drives the base pose error e0 = pose_error(reference,
/// base) along de0/dt = -feedback(e0).
Twistd base_twist_target(const PoseErrord& e0, const PlannerParams& params);

/// Mission-arm joint rates such that de1/dt = -feedback(e1) with the base
/// moving at V_b. Undamped, this is
///   J_m1^-1 (J_e^-1 (J_ed V_d + feedback(e1)) - J_0 V_b).
Vector6d mission_arm_velocity(const KinematicSnapshot& snap, const PoseErrord& e1,
                              const Twistd& desired_twist, const Twistd& V_b,
                              const PlannerParams& params);

/// Operand of the mission-arm inverse: J_e^-1 (J_ed V_d + feedback(e1)) - J_0 V_b.
Vector6d mission_task_operand(const KinematicSnapshot& snap, const PoseErrord& e1,
                              const Twistd& desired_twist, const Twistd& V_b,
                              const PlannerParams& params);

/// Balance-arm joint rates solving J_c2 dth2 = C - J_c1 dth1 - J_b V_target,
/// V_target = base_twist_target(e0).
Vector6d balance_arm_velocity(const KinematicSnapshot& snap, const PoseErrord& e0,
                              const Vector6d& theta_dot1, const PlannerParams& params);

Vector6d balance_task_operand(const KinematicSnapshot& snap, const PoseErrord& e0,
                              const Vector6d& theta_dot1, const PlannerParams& params);

}  // namespace ffsr
