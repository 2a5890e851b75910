#include "ffsr/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ffsr {

void PlannerParams::validate() const {
  if (!(m > 0.0 && m < 1.0)) throw std::invalid_argument("planner: m must lie in (0, 1)");
  if (!(T_c > 0.0)) throw std::invalid_argument("planner: T_c must be positive");
  if (!(deadband >= 0.0)) throw std::invalid_argument("planner: deadband must be >= 0");
  if (!(k_p >= 0.0)) throw std::invalid_argument("planner: k_p must be >= 0");
  if (!(damping.eps > 0.0)) throw std::invalid_argument("planner: damping eps must be positive");
  if (!(damping.lambda_max >= 0.0))
    throw std::invalid_argument("planner: damping lambda_max must be >= 0");
}

Eigen::VectorXd phi(const Eigen::Ref<const Eigen::VectorXd>& x, double m, double T_c,
                    PhiForm form, double deadband) {
  const double r = x.norm();
  if (r <= deadband || r == 0.0) return Eigen::VectorXd::Zero(x.size());
  const double rm = std::pow(r, m);
  const double scale = std::exp(rm) / (m * T_c);
  if (form == PhiForm::canonical) {
    // |x|^(1-m) x/|x| = x |x|^-m
    return (scale / rm) * x;
  }
  return (scale / r) * x;
}

Vector6d feedback(const Vector6d& e, const PlannerParams& params) {
  switch (params.feedback_mode) {
    case FeedbackMode::none:
      return Vector6d::Zero();
    case FeedbackMode::proportional:
      return params.k_p * e;
    case FeedbackMode::predefined_time:
      return phi<6>(e, params.m, params.T_c, params.phi_form, params.deadband);
  }
  return Vector6d::Zero();
}

namespace {

void check_timing(double total_time, double ramp_time) {
  if (!(ramp_time > 0.0 && 2.0 * ramp_time < total_time))
    throw std::invalid_argument("trapezoid: need 0 < 2 * ramp_time < total_time");
}

}  // namespace

double trapezoid_profile(double path_length, double total_time, double ramp_time, double t) {
  check_timing(total_time, ramp_time);
  if (!(path_length > 0.0)) throw std::invalid_argument("trapezoid: path_length must be positive");
  if (t <= 0.0 || t >= total_time) return 0.0;
  const double v_peak = path_length / (total_time - ramp_time);
  if (t < ramp_time) return v_peak * t / ramp_time;
  if (t > total_time - ramp_time) return v_peak * (total_time - t) / ramp_time;
  return v_peak;
}

double trapezoid_fraction(double total_time, double ramp_time, double t) {
  check_timing(total_time, ramp_time);
  if (t <= 0.0) return 0.0;
  if (t >= total_time) return 1.0;
  const double rate = 1.0 / (total_time - ramp_time);  // peak fraction rate
  if (t < ramp_time) return 0.5 * rate * t * t / ramp_time;
  if (t <= total_time - ramp_time) return rate * (t - 0.5 * ramp_time);
  const double tau = total_time - t;
  return 1.0 - 0.5 * rate * tau * tau / ramp_time;
}

DesiredTrajectory::DesiredTrajectory(const Posed& start, const Posed& goal, double total_time,
                                     double ramp_time)
    : start_(start), goal_(goal), total_time_(total_time), ramp_time_(ramp_time) {
  check_timing(total_time, ramp_time);
  rotation_ = (goal.attitude * start.attitude.inverse()).log();
}

std::pair<Posed, Twistd> DesiredTrajectory::at(double t) const {
  if (t <= 0.0) return {start_, Twistd::zero()};
  if (t >= total_time_) return {goal_, Twistd::zero()};
  const double s = trapezoid_fraction(total_time_, ramp_time_, t);
  // d(fraction)/dt is the unit-length speed profile.
  const double sd = trapezoid_profile(1.0, total_time_, ramp_time_, t);
  const Vector3d delta = goal_.position - start_.position;
  Posed pose(start_.position + s * delta,
             UnitQuaterniond::exp(s * rotation_) * start_.attitude);
  return {pose, Twistd(sd * delta, sd * rotation_)};
}

std::pair<Posed, Twistd> desired_pose_twist(const DesiredTrajectory& traj, double t) {
  return traj.at(t);
}

Twistd base_twist_target(const PoseErrord& e0, const PlannerParams& params) {
  const Vector6d fb = feedback(e0.vector(), params);
  if (fb.isZero(0.0)) return Twistd::zero();
  const ErrorRateMaps<double> maps = error_rate_maps(e0);
  return Twistd(Vector6d(maps.actual_map.partialPivLu().solve(fb)));
}

Vector6d mission_task_operand(const KinematicSnapshot& snap, const PoseErrord& e1,
                              const Twistd& desired_twist, const Twistd& V_b,
                              const PlannerParams& params) {
  const ErrorRateMaps<double> maps = error_rate_maps(e1);
  const Vector6d demand = maps.desired_map * desired_twist.vector() + feedback(e1.vector(), params);
  const Vector6d V_e = maps.actual_map.partialPivLu().solve(demand);
  return V_e - snap.J_0 * V_b.vector();
}

Vector6d mission_arm_velocity(const KinematicSnapshot& snap, const PoseErrord& e1,
                              const Twistd& desired_twist, const Twistd& V_b,
                              const PlannerParams& params) {
  return damped_pinv(snap.J_m1, params.damping) *
         mission_task_operand(snap, e1, desired_twist, V_b, params);
}

Vector6d balance_task_operand(const KinematicSnapshot& snap, const PoseErrord& e0,
                              const Vector6d& theta_dot1, const PlannerParams& params) {
  const Twistd target = base_twist_target(e0, params);
  return snap.C - snap.J_c1 * theta_dot1 - snap.H_0 * target.vector();
}

Vector6d balance_arm_velocity(const KinematicSnapshot& snap, const PoseErrord& e0,
                              const Vector6d& theta_dot1, const PlannerParams& params) {
  return damped_pinv(snap.J_c2, params.damping) *
         balance_task_operand(snap, e0, theta_dot1, params);
}

}  // namespace ffsr
