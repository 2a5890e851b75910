#include "ffsr/avoidance.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace ffsr {

void CdfParams::validate() const {
  if (!(xi > 0.0)) throw std::invalid_argument("cdf: xi must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("cdf: delta must be positive");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("cdf: mu must lie in [0, 1]");
  if (!(escape_gain > 0.0)) throw std::invalid_argument("cdf: escape_gain must be positive");
}

namespace {

Vector3d closest_on_segment(const Vector3d& a, const Vector3d& b, const Vector3d& c) {
  const Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return a;
  const double s = std::clamp((c - a).dot(ab) / len2, 0.0, 1.0);
  return a + s * ab;
}

}  // namespace

DistanceResult min_distance(std::span<const Vector3d> points, const Obstacle& obstacle) {
  if (points.empty()) throw std::invalid_argument("min_distance: empty point list");
  DistanceResult out;
  out.distance = (points[0] - obstacle.center).norm();
  double nearest_sample = out.distance;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double di = (points[i] - obstacle.center).norm();
    if (di < nearest_sample) {
      nearest_sample = di;
      out.index = i;
    }
    const Vector3d p = closest_on_segment(points[i - 1], points[i], obstacle.center);
    out.distance = std::min(out.distance, (p - obstacle.center).norm());
  }
  return out;
}

ClosestBodyPoint closest_body_point(const ArmFrames& frames, const Obstacle& obstacle) {
  const auto poly = frames.polyline();
  ClosestBodyPoint best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kArmJoints; ++i) {
    const Vector3d p = closest_on_segment(poly[i], poly[i + 1], obstacle.center);
    const double d = (p - obstacle.center).norm();
    if (d < best.distance) {
      best.distance = d;
      best.link = i;
      best.point = p;
    }
  }
  return best;
}

ClosestBodyPoint closest_body_point(const RobotModel& model, const SystemState& state, int arm,
                                    const Obstacle& obstacle) {
  return closest_body_point(arm_frames(model, state, arm), obstacle);
}

double danger_value(double d, const CdfParams& params, const Obstacle& obstacle) {
  if (d >= obstacle.danger_radius) return 0.0;
  if (d <= 0.0) return params.delta;
  const double g = 1.0 / d - 1.0 / obstacle.danger_radius;
  return std::min(params.delta, params.xi * g * g);
}

Vector6d escape_joint_velocity(const RobotModel& model, const SystemState& state, int arm,
                               const Obstacle& obstacle, const CdfParams& params) {
  const ArmFrames frames = arm_frames(model, state, arm);
  const ClosestBodyPoint c = closest_body_point(frames, obstacle);
  const double danger = danger_value(c.distance, params, obstacle);
  if (danger == 0.0 || c.distance == 0.0) return Vector6d::Zero();
  const Vector3d n = (c.point - obstacle.center) / c.distance;
  return params.escape_gain * danger * point_jacobian(frames, c.link, c.point).transpose() * n;
}

Vector6d avoidance_mission_velocity(const KinematicSnapshot& snap, const PoseErrord& e1,
                                    const Twistd& desired_twist, const Twistd& V_b,
                                    const Vector6d& escape, const CdfParams& params,
                                    const PlannerParams& planner_params) {
  Vector6d out = mission_arm_velocity(snap, e1, desired_twist, V_b, planner_params);
  if (!escape.isZero(0.0))
    out += nullspace_projector(snap.J_m1, params.mu, planner_params.damping) * escape;
  return out;
}

Vector6d avoidance_balance_velocity(const KinematicSnapshot& snap, const PoseErrord& e0,
                                    const Vector6d& theta_dot1, const Vector6d& escape,
                                    const CdfParams& params, const PlannerParams& planner_params) {
  Vector6d out = balance_arm_velocity(snap, e0, theta_dot1, planner_params);
  if (!escape.isZero(0.0))
    out += nullspace_projector(snap.J_c2, params.mu, planner_params.damping) * escape;
  return out;
}

}  // namespace ffsr
