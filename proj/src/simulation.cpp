#include "ffsr/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace ffsr {

const char* method_name(Method m) {
  switch (m) {
    case Method::no_avoidance: return "no_avoidance";
    case Method::no_feedback: return "no_feedback";
    case Method::proportional: return "proportional";
    case Method::predefined_time: return "predefined_time";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : kAllMethods)
    if (name == method_name(m)) return m;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected no_avoidance, no_feedback, proportional or "
                              "predefined_time)");
}

void Scenario::validate() const {
  robot.validate();
  planner.validate();
  cdf.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("scenario: dt must be positive");
  if (!(total_time > 0.0)) throw std::invalid_argument("scenario: total_time must be positive");
  if (!(ramp_time > 0.0 && 2.0 * ramp_time < total_time))
    throw std::invalid_argument("scenario: need 0 < 2 * ramp_time < total_time");
  if (obstacle && !(obstacle->danger_radius > 0.0))
    throw std::invalid_argument("scenario: obstacle danger_radius must be positive");
  if (!initial.theta1.allFinite() || !initial.theta2.allFinite())
    throw std::invalid_argument("scenario: initial joint angles must be finite");
}

std::size_t Scenario::steps() const {
  return static_cast<std::size_t>(std::llround(total_time / dt));
}

Posed Scenario::planned_start() const {
  return trajectory_start ? *trajectory_start : forward_kinematics(robot, initial, 1);
}

DesiredTrajectory Scenario::trajectory() const {
  return DesiredTrajectory(planned_start(), target, total_time, ramp_time);
}

PlannerParams Scenario::effective_planner() const {
  PlannerParams p = planner;
  switch (method) {
    case Method::no_avoidance:
    case Method::no_feedback:
      p.feedback_mode = FeedbackMode::none;
      break;
    case Method::proportional:
      p.feedback_mode = FeedbackMode::proportional;
      break;
    case Method::predefined_time:
      p.feedback_mode = FeedbackMode::predefined_time;
      break;
  }
  return p;
}

bool Scenario::avoidance_enabled() const {
  return obstacle.has_value() && method != Method::no_avoidance;
}

double Metrics::peak_joint_speed() const {
  return std::max(max_joint_speed[0].maxCoeff(), max_joint_speed[1].maxCoeff());
}

Rollout::Rollout(const Scenario& scenario)
    : scenario_(scenario),
      trajectory_(scenario.trajectory()),
      planner_(scenario.effective_planner()),
      base_reference_(scenario.initial.base),
      avoidance_(scenario.avoidance_enabled()) {}

Rates Rollout::rates(const SystemState& state) const {
  const Scenario& sc = scenario_;
  const KinematicSnapshot snap = snapshot(sc.robot, state, sc.momentum);
  const auto [desired_pose, desired_twist] = trajectory_.at(state.time);

  Rates r;
  r.end_effector = snap.end_effector1;
  r.e1 = pose_error(desired_pose, snap.end_effector1);
  r.e0 = pose_error(base_reference_, state.base);
  const Twistd base_target = base_twist_target(r.e0, planner_);

  Vector6d escape1 = Vector6d::Zero();
  Vector6d escape2 = Vector6d::Zero();
  if (sc.obstacle) {
    const ArmFrames f1 = arm_frames(sc.robot, state, 1);
    const ArmFrames f2 = arm_frames(sc.robot, state, 2);
    r.dmin = std::min(closest_body_point(f1, *sc.obstacle).distance,
                      closest_body_point(f2, *sc.obstacle).distance);
    if (avoidance_) {
      escape1 = escape_joint_velocity(sc.robot, state, 1, *sc.obstacle, sc.cdf);
      escape2 = escape_joint_velocity(sc.robot, state, 2, *sc.obstacle, sc.cdf);
    }
  }

  r.theta_dot1 = avoidance_mission_velocity(snap, r.e1, desired_twist, base_target, escape1,
                                            sc.cdf, planner_);
  r.theta_dot2 =
      avoidance_balance_velocity(snap, r.e0, r.theta_dot1, escape2, sc.cdf, planner_);
  r.base_twist = base_twist_from_momentum(snap, r.theta_dot1, r.theta_dot2);

  if (!r.theta_dot1.allFinite() || !r.theta_dot2.allFinite() || !r.base_twist.all_finite())
    throw SimulationError("non-finite joint-rate command", state.time);
  return r;
}

namespace {

// Tangent-space increment of the state: base linear, base rotation vector,
// joint angles of both arms.
struct Increment {
  Vector3d p = Vector3d::Zero();
  Vector3d w = Vector3d::Zero();
  Vector6d q1 = Vector6d::Zero();
  Vector6d q2 = Vector6d::Zero();
};

SystemState retract(const SystemState& s, const Increment& u, double t) {
  SystemState out = s;
  out.base.position = s.base.position + u.p;
  out.base.attitude = UnitQuaterniond::exp(u.w) * s.base.attitude;
  out.theta1 = s.theta1 + u.q1;
  out.theta2 = s.theta2 + u.q2;
  out.time = t;
  return out;
}

// Inverse differential of exp on so(3), truncated at the order RK4 needs.
Vector3d dexp_inv(const Vector3d& u, const Vector3d& w) {
  return w - 0.5 * u.cross(w) + (1.0 / 12.0) * u.cross(u.cross(w));
}

Increment derivative(const Rates& r, const Vector3d& u_rot) {
  Increment k;
  k.p = r.base_twist.linear;
  k.w = dexp_inv(u_rot, r.base_twist.angular);
  k.q1 = r.theta_dot1;
  k.q2 = r.theta_dot2;
  return k;
}

Increment scaled(const Increment& k, double h) {
  Increment u;
  u.p = h * k.p;
  u.w = h * k.w;
  u.q1 = h * k.q1;
  u.q2 = h * k.q2;
  return u;
}

SystemState rk_step(const Rollout& ro, const SystemState& s0, const Rates& r0, double h) {
  const double t0 = s0.time;
  const Increment k1 = derivative(r0, Vector3d::Zero());

  const Increment u2 = scaled(k1, 0.5 * h);
  const Increment k2 = derivative(ro.rates(retract(s0, u2, t0 + 0.5 * h)), u2.w);

  const Increment u3 = scaled(k2, 0.5 * h);
  const Increment k3 = derivative(ro.rates(retract(s0, u3, t0 + 0.5 * h)), u3.w);

  const Increment u4 = scaled(k3, h);
  const Increment k4 = derivative(ro.rates(retract(s0, u4, t0 + h)), u4.w);

  Increment u;
  u.p = (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
  u.w = (h / 6.0) * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
  u.q1 = (h / 6.0) * (k1.q1 + 2.0 * k2.q1 + 2.0 * k3.q1 + k4.q1);
  u.q2 = (h / 6.0) * (k1.q2 + 2.0 * k2.q2 + 2.0 * k3.q2 + k4.q2);
  return retract(s0, u, t0 + h);
}

}  // namespace

SystemState Rollout::step(const SystemState& state, double dt) const {
  return rk_step(*this, state, rates(state), dt);
}

LogRecord Rollout::record(const SystemState& state, const Rates& r) const {
  LogRecord rec;
  rec.t = state.time;
  rec.theta1 = state.theta1;
  rec.theta2 = state.theta2;
  rec.theta_dot1 = r.theta_dot1;
  rec.theta_dot2 = r.theta_dot2;
  rec.base = state.base;
  rec.end_effector = r.end_effector;
  rec.e1 = r.e1;
  rec.e0 = r.e0;
  rec.base_twist = r.base_twist;
  rec.dmin = r.dmin;
  const Momentum h =
      system_momentum(scenario_.robot, state, r.base_twist, r.theta_dot1, r.theta_dot2);
  rec.momentum_residual = (h - scenario_.momentum).norm();
  return rec;
}

SystemState step(const Scenario& scenario, const SystemState& state, double t, double dt) {
  SystemState s = state;
  s.time = t;
  return Rollout(scenario).step(s, dt);
}

RunResult run(const Scenario& scenario, const RunOptions& options) {
  scenario.validate();
  const Rollout ro(scenario);
  const std::size_t n = scenario.steps();
  const double dt = scenario.dt;

  RunResult result;
  TrajectoryLog& log = result.log;
  log.momentum_norm = scenario.momentum.norm();
  log.records.reserve(n + 1);

  SystemState s = scenario.initial;
  s.time = 0.0;
  for (std::size_t k = 0;; ++k) {
    s.time = static_cast<double>(k) * dt;
    const Rates r = ro.rates(s);
    log.records.push_back(ro.record(s, r));
    const double speed = std::max(r.theta_dot1.cwiseAbs().maxCoeff(),
                                  r.theta_dot2.cwiseAbs().maxCoeff());
    if (speed > options.abort_speed) {
      log.aborted = true;
      break;
    }
    if (k == n) break;
    s = rk_step(ro, s, r, dt);
  }
  result.metrics = compute_metrics(log);
  return result;
}

std::optional<double> settling_time(const std::vector<double>& times,
                                    const std::vector<double>& values, double tol) {
  if (times.size() != values.size())
    throw std::invalid_argument("settling_time: size mismatch");
  if (values.empty() || !(values.back() < tol)) return std::nullopt;
  std::size_t k = values.size() - 1;
  while (k > 0 && values[k - 1] < tol) --k;
  return times[k];
}

Metrics compute_metrics(const TrajectoryLog& log, double settle_tol) {
  Metrics m;
  m.max_joint_speed[0].setZero();
  m.max_joint_speed[1].setZero();
  if (log.records.empty()) return m;
  std::vector<double> t, e1p, e0;
  t.reserve(log.records.size());
  e1p.reserve(log.records.size());
  e0.reserve(log.records.size());
  for (const LogRecord& r : log.records) {
    t.push_back(r.t);
    e1p.push_back(r.e1.e_p.norm());
    e0.push_back(r.e0.norm());
    m.max_joint_speed[0] = m.max_joint_speed[0].cwiseMax(r.theta_dot1.cwiseAbs());
    m.max_joint_speed[1] = m.max_joint_speed[1].cwiseMax(r.theta_dot2.cwiseAbs());
    m.min_obstacle_distance = std::min(m.min_obstacle_distance, r.dmin);
    m.base_position_error_peak = std::max(m.base_position_error_peak, r.e0.e_p.norm());
    m.base_attitude_error_peak = std::max(m.base_attitude_error_peak, r.e0.e_o.norm());
    m.max_momentum_residual = std::max(m.max_momentum_residual, r.momentum_residual);
  }
  m.final_position_error = log.records.back().e1.e_p.norm();
  m.final_pose_error = log.records.back().e1.norm();
  if (!log.aborted) {
    m.settling_time = settling_time(t, e1p, settle_tol);
    m.base_settling_time = settling_time(t, e0, settle_tol);
  }
  return m;
}

}  // namespace ffsr
