#pragma once

// Momentum-conserving kinematics of a free-floating base carrying two 6-DOF
// serial arms. Arm 1 is the mission arm, arm 2 the balance arm.

#include <array>
#include <vector>

#include "ffsr/geometry.hpp"

namespace ffsr {

inline constexpr int kArmJoints = 6;

/// One revolute joint and the rigid link it drives.
struct LinkParam {
  Vector3d axis = Vector3d::UnitZ();      // joint axis in the parent frame (unit)
  Vector3d offset = Vector3d::Zero();     // joint-to-next-joint vector in the link frame (m)
  double mass = 1.0;                      // kg
  Matrix3d inertia = Matrix3d::Identity();  // about the link CoM, link frame (kg m^2)

  double length() const { return offset.norm(); }
  Vector3d com() const { return 0.5 * offset; }
};

struct ArmModel {
  Posed mount;                         // shoulder frame in the base frame
  std::array<LinkParam, kArmJoints> links;
  UnitQuaterniond tool;                // end-effector frame relative to the last link
};

struct RobotModel {
  double base_mass = 1.0;
  Matrix3d base_inertia = Matrix3d::Identity();  // about the base CoM, base frame
  std::array<ArmModel, 2> arms;

  double total_mass() const;
  /// Throws std::invalid_argument when a physical invariant is violated.
  void validate() const;
};

/// Base pose is the pose of the base CoM frame in the inertial frame.
struct SystemState {
  Posed base;
  Vector6d theta1 = Vector6d::Zero();
  Vector6d theta2 = Vector6d::Zero();
  double time = 0.0;

  const Vector6d& theta(int arm) const { return arm == 1 ? theta1 : theta2; }
  Vector6d& theta(int arm) { return arm == 1 ? theta1 : theta2; }
};

/// Inertial-frame geometry of one arm at a given state.
struct ArmFrames {
  std::array<Vector3d, kArmJoints> joint_position;
  std::array<Vector3d, kArmJoints> joint_axis;
  std::array<Matrix3d, kArmJoints> link_rotation;
  std::array<Vector3d, kArmJoints> link_com;
  Posed end_effector;

  /// Joint positions followed by the end-effector point (7 vertices).
  std::array<Vector3d, kArmJoints + 1> polyline() const;
};

ArmFrames arm_frames(const RobotModel& model, const SystemState& state, int arm);

Posed forward_kinematics(const RobotModel& model, const SystemState& state, int arm);

/// `samples_per_link` (>= 2) evenly spaced points on each link segment,
/// link endpoints included.
std::vector<Vector3d> body_points(const RobotModel& model, const SystemState& state, int arm,
                                  int samples_per_link = 2);

/// Spatial momentum (linear; angular about the inertial origin), N s and N m s.
using Momentum = Vector6d;

/// Matrices of the floating-base kinematics at one state.
///
/// Momentum about the base CoM:  J_b V_b + J_c1 dth1 + J_c2 dth2 = C.
/// Mission end-effector twist:   V_e = J_0 V_b + J_m1 dth1.
struct KinematicSnapshot {
  Matrix6d J_m1;  // arm-1 geometric Jacobian (inertial frame)
  Matrix6d J_0;   // base twist to end-effector twist
  Matrix6d J_b;   // composite inertia of the whole system seen from the base
  Matrix6d H_0;   // base-coupling momentum matrix (equal to J_b)
  Matrix6d J_c1;  // arm-1 joint rates to momentum
  Matrix6d J_c2;  // arm-2 joint rates to momentum
  Vector6d C;     // conserved momentum expressed about the base CoM
  Posed base;
  Posed end_effector1;
  Posed end_effector2;
};

/// `momentum` is the conserved total momentum with angular part about the
/// inertial origin.
KinematicSnapshot snapshot(const RobotModel& model, const SystemState& state,
                           const Momentum& momentum = Momentum::Zero());

/// V_b = J_b^-1 (C - J_c1 dth1 - J_c2 dth2).
Twistd base_twist_from_momentum(const KinematicSnapshot& snap, const Vector6d& theta_dot1,
                                const Vector6d& theta_dot2);

/// Total momentum (angular about the inertial origin) summed body by body
/// from per-body velocities. Independent of the snapshot matrices.
Momentum system_momentum(const RobotModel& model, const SystemState& state,
                         const Twistd& base_twist, const Vector6d& theta_dot1,
                         const Vector6d& theta_dot2);

/// Positional Jacobian (3x6, inertial frame, fixed base) of a point rigidly
/// attached to link `link` (0-based) of `arm`.
Eigen::Matrix<double, 3, kArmJoints> point_jacobian(const ArmFrames& frames, int link,
                                                    const Vector3d& point);

}  // namespace ffsr
