#pragma once

// Danger-field obstacle avoidance: distance queries against the arm links,
// the capped danger value, the repulsive joint-rate and the avoidance laws
// that add it through a null-space projector.

#include <cstddef>
#include <span>
#include <vector>

#include "ffsr/geometry.hpp"
#include "ffsr/planner.hpp"
#include "ffsr/robot_model.hpp"

namespace ffsr {

struct Obstacle {
  Vector3d center = Vector3d::Zero();  // m
  double danger_radius = 0.2;          // m
};

struct CdfParams {
  double xi = 0.1;
  double delta = 17.25;     // saturation level of the danger value
  double mu = 0.5;          // projector weight, [0, 1]
  double escape_gain = 50.0;

  void validate() const;
};

struct DistanceResult {
  double distance = 0.0;
  std::size_t index = 0;  // closest sample
};

/// Minimum distance from the obstacle center to the polyline through
/// `points`; `index` is the sample nearest to the center.
DistanceResult min_distance(std::span<const Vector3d> points, const Obstacle& obstacle);

/// Closest point of an arm to the obstacle, found exactly on the link segments.
struct ClosestBodyPoint {
  double distance = 0.0;
  int link = 0;  // 0-based
  Vector3d point = Vector3d::Zero();
};

ClosestBodyPoint closest_body_point(const ArmFrames& frames, const Obstacle& obstacle);
ClosestBodyPoint closest_body_point(const RobotModel& model, const SystemState& state, int arm,
                                    const Obstacle& obstacle);

/// 0 outside the danger radius, xi (1/d - 1/R)^2 inside, capped at delta.
double danger_value(double d, const CdfParams& params, const Obstacle& obstacle);

/// escape_gain * danger * J_p^T n, with J_p the positional Jacobian of the
/// closest body point and n the unit vector from the obstacle to it.
Vector6d escape_joint_velocity(const RobotModel& model, const SystemState& state, int arm,
                               const Obstacle& obstacle, const CdfParams& params);

/// Mission-arm law with the escape rate added through P(J_m1, mu).
Vector6d avoidance_mission_velocity(const KinematicSnapshot& snap, const PoseErrord& e1,
                                    const Twistd& desired_twist, const Twistd& V_b,
                                    const Vector6d& escape, const CdfParams& params,
                                    const PlannerParams& planner_params);

/// Balance-arm law with the escape rate added through P(J_c2, mu).
Vector6d avoidance_balance_velocity(const KinematicSnapshot& snap, const PoseErrord& e0,
                                    const Vector6d& theta_dot1, const Vector6d& escape,
                                    const CdfParams& params, const PlannerParams& planner_params);

}  // namespace ffsr
