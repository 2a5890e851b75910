#pragma once

// Deterministic scenario rollouts: the planner laws integrated through the
// floating-base kinematics with a fourth-order Runge-Kutta scheme (Lie-group
// variant for the base attitude).

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ffsr/avoidance.hpp"
#include "ffsr/planner.hpp"
#include "ffsr/robot_model.hpp"

namespace ffsr {

enum class Method { no_avoidance, no_feedback, proportional, predefined_time };

const char* method_name(Method m);
/// Throws std::invalid_argument for an unknown name.
Method parse_method(const std::string& name);
inline constexpr Method kAllMethods[] = {Method::no_avoidance, Method::no_feedback,
                                         Method::proportional, Method::predefined_time};

struct Scenario {
  std::string name = "scenario";
  RobotModel robot;
  SystemState initial;
  Momentum momentum = Momentum::Zero();
  Posed target;
  /// Planned start of the desired trajectory; FK of the initial state when empty.
  std::optional<Posed> trajectory_start;
  double ramp_time = 4.0;  // s
  std::optional<Obstacle> obstacle;
  PlannerParams planner;
  CdfParams cdf;
  double total_time = 20.0;  // s
  double dt = 1e-3;          // s
  Method method = Method::predefined_time;

  void validate() const;
  std::size_t steps() const;
  Posed planned_start() const;
  DesiredTrajectory trajectory() const;
  /// Planner parameters with the feedback mode implied by `method`.
  PlannerParams effective_planner() const;
  bool avoidance_enabled() const;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time;
};

struct LogRecord {
  double t = 0.0;
  Vector6d theta1, theta2;
  Vector6d theta_dot1, theta_dot2;
  Posed base;
  Posed end_effector;
  PoseErrord e1;
  PoseErrord e0;
  Twistd base_twist;
  double dmin = std::numeric_limits<double>::infinity();
  double momentum_residual = 0.0;
};

struct TrajectoryLog {
  std::vector<LogRecord> records;
  double momentum_norm = 0.0;  // |C|
  bool aborted = false;        // stopped early by RunOptions::abort_speed
};

struct Metrics {
  double final_position_error = 0.0;  // m
  double final_pose_error = 0.0;
  std::optional<double> settling_time;       // of |e1_p|; empty when not settled
  std::optional<double> base_settling_time;  // of |e0|
  std::array<Vector6d, 2> max_joint_speed;   // rad/s, per arm per joint
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
  double base_position_error_peak = 0.0;  // m
  double base_attitude_error_peak = 0.0;
  double max_momentum_residual = 0.0;

  double peak_joint_speed() const;  // over both arms, rad/s
};

/// Commanded rates and errors at one state.
struct Rates {
  Vector6d theta_dot1 = Vector6d::Zero();
  Vector6d theta_dot2 = Vector6d::Zero();
  Twistd base_twist;
  PoseErrord e1;
  PoseErrord e0;
  Posed end_effector;
  double dmin = std::numeric_limits<double>::infinity();
};

/// Precomputed, immutable pieces of a scenario shared by every step.
class Rollout {
 public:
  explicit Rollout(const Scenario& scenario);

  const Scenario& scenario() const { return scenario_; }
  const DesiredTrajectory& trajectory() const { return trajectory_; }

  Rates rates(const SystemState& state) const;
  /// One RK step of size dt from `state` (whose time field is advanced).
  SystemState step(const SystemState& state, double dt) const;
  LogRecord record(const SystemState& state, const Rates& r) const;

 private:
  Scenario scenario_;
  DesiredTrajectory trajectory_;
  PlannerParams planner_;
  Posed base_reference_;
  bool avoidance_;
};

SystemState step(const Scenario& scenario, const SystemState& state, double t, double dt);

struct RunOptions {
  /// Stop once any joint rate magnitude exceeds this (rad/s).
  double abort_speed = std::numeric_limits<double>::infinity();
};

struct RunResult {
  TrajectoryLog log;
  Metrics metrics;
};

/// Full rollout on the uniform grid t_k = k dt, k = 0..steps(); one log
/// record per grid point.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

Metrics compute_metrics(const TrajectoryLog& log, double settle_tol = 1e-6);

/// Earliest grid time after which every value is below tol; empty if the
/// last value is not below tol.
std::optional<double> settling_time(const std::vector<double>& times,
                                    const std::vector<double>& values, double tol);

}  // namespace ffsr
