#include "ffsr/reference.hpp"

#include <Eigen/Geometry>
#include <array>
#include <cmath>

namespace ffsr::reference {

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

// Link lengths (m), masses (kg) and zero-angle joint axes.
constexpr double kLength[kArmJoints] = {0.3, 0.4, 0.4, 0.2, 0.2, 0.15};
constexpr double kMass[kArmJoints] = {8, 6, 6, 3, 3, 2};
constexpr double kLinkRadius = 0.08;
constexpr double kLink6Radius = 0.1;

struct Geometry {
  double half_side;        // base cube half width, m
  int face;                // mount face of arm 1: 0 is +x, 1 is +y
  double u, v;             // mount point on the face, m
  double tilt, tilt_dir;   // mount tilt away from the face normal, rad
  double roll1, roll2;     // mount roll of arm 1 and arm 2 about their first axes, rad
  double lateral6;         // end-effector lateral offset on link 6, m
  double wrist_inertia;    // housing inertia added to links 4-6, kg m^2
  std::array<double, kArmJoints> home1, home2;  // home angle offsets, rad
  Vector3d start_offset;   // planned start minus FK(theta_0), m
};

// Mounts, home offsets and start offset. The given initial state is well
// conditioned, the target is reachable, and the nominal path passes just
// outside the danger radius.
const Geometry kGeometry{
    .half_side = 0.25,
    .face = 0,
    .u = 0.0,
    .v = 0.171,
    .tilt = 0.333,
    .tilt_dir = 5.460,
    .roll1 = 0.793,
    .roll2 = 1.518,
    .lateral6 = 0.008,
    .wrist_inertia = 0.123,
    .home1 = {0.0, 1.560, -0.436, -0.438, 0.652, 0.0},
    .home2 = {0.0, -1.139, 1.055, -1.233, -0.184, 0.0},
    .start_offset = Vector3d(0.010, 0.007, -0.026),
};

Matrix3d rod_inertia(double mass, double length, double radius) {
  const double a = mass * (3.0 * radius * radius + length * length) / 12.0;
  return Vector3d(a, a, 0.5 * mass * radius * radius).asDiagonal();
}

Vector3d zero_axis(int i) {
  return (i == 0 || i == 3 || i == 5) ? Vector3d::UnitZ() : Vector3d::UnitY();
}

// Home offsets are folded into the link frames so that the given joint
// angles are used verbatim.
ArmModel make_arm(const Posed& mount, const Geometry& g, const std::array<double, kArmJoints>& home) {
  ArmModel arm;
  arm.mount = mount;
  Matrix3d A = Matrix3d::Identity();
  for (int i = 0; i < kArmJoints; ++i) {
    Vector3d offset(0.0, 0.0, kLength[i]);
    Matrix3d inertia = rod_inertia(kMass[i], kLength[i], kLinkRadius);
    if (i == 5) {
      offset.x() = g.lateral6;
      inertia = rod_inertia(kMass[i], kLength[i], kLink6Radius);
    }
    if (i >= 3) inertia += g.wrist_inertia * Matrix3d::Identity();
    arm.links[i].axis = A * zero_axis(i);
    A = A * Eigen::AngleAxisd(home[i], zero_axis(i)).toRotationMatrix();
    arm.links[i].offset = A * offset;
    arm.links[i].mass = kMass[i];
    arm.links[i].inertia = A * inertia * A.transpose();
  }
  arm.tool = UnitQuaterniond(Eigen::Quaterniond(A));
  return arm;
}

// Given initial base pose, joint angles, end-effector attitude, target and obstacle.
const Vector3d kBasePosition(-0.2832, 0.3107, 0.3248);
constexpr double kTheta1Deg[kArmJoints] = {0, 47.72, -93.91, 0, -23.82, 0};
constexpr double kTheta2Deg[kArmJoints] = {0, -47.72, 176.09, 0, -23.82, 0};
const UnitQuaterniond kEndEffectorAttitude(0, 0.8191, 0, 0.5736);
const Vector3d kTargetPosition(0.7147, 0.4150, -0.1758);
const UnitQuaterniond kTargetAttitude(0.0215, 0.9027, 0.1184, 0.4132);
const Vector3d kObstacle(-0.0691, 0.6037, 0.4742);

SystemState initial_state() {
  SystemState s;
  s.base = Posed(kBasePosition, UnitQuaterniond());
  for (int i = 0; i < kArmJoints; ++i) {
    s.theta1(i) = kTheta1Deg[i] * kDeg;
    s.theta2(i) = kTheta2Deg[i] * kDeg;
  }
  return s;
}

}  // namespace

RobotModel robot() {
  const Geometry& g = kGeometry;
  RobotModel r;
  const double side = 2.0 * g.half_side;
  r.base_mass = 200.0;
  r.base_inertia = (r.base_mass * 2.0 * side * side / 12.0) * Matrix3d::Identity();

  UnitQuaterniond to_face;
  Vector3d point;
  if (g.face == 0) {
    to_face = UnitQuaterniond::from_axis_angle(Vector3d::UnitY(), M_PI / 2);
    point = Vector3d(g.half_side, g.u, g.v);
  } else {
    to_face = UnitQuaterniond::from_axis_angle(Vector3d::UnitX(), -M_PI / 2);
    point = Vector3d(g.u, g.half_side, g.v);
  }
  const Vector3d n = to_face.rotate(Vector3d::UnitZ());
  const Vector3d t1 = n.unitOrthogonal(), t2 = n.cross(t1);
  const Vector3d tilt_axis = std::cos(g.tilt_dir) * t1 + std::sin(g.tilt_dir) * t2;
  const UnitQuaterniond m1 = UnitQuaterniond::from_axis_angle(tilt_axis, g.tilt) * to_face *
                             UnitQuaterniond::from_axis_angle(Vector3d::UnitZ(), g.roll1);
  // Arm 2 sits on the opposite face, a half turn about the base z axis.
  const UnitQuaterniond half_turn = UnitQuaterniond::from_axis_angle(Vector3d::UnitZ(), M_PI);
  const UnitQuaterniond m2 = half_turn * m1 * UnitQuaterniond::from_axis_angle(Vector3d::UnitZ(), g.roll2);
  r.arms[0] = make_arm(Posed(point, m1), g, g.home1);
  r.arms[1] = make_arm(Posed(half_turn.rotate(point), m2), g, g.home2);

  // Tool frames put the end-effector attitude at the given initial value.
  const Posed ee = forward_kinematics(r, initial_state(), 1);
  const UnitQuaterniond fix = ee.attitude.inverse() * kEndEffectorAttitude;
  r.arms[0].tool = r.arms[0].tool * fix;
  r.arms[1].tool = r.arms[1].tool * fix;
  return r;
}

Scenario reference_scenario() {
  Scenario sc;
  sc.name = "reference_scenario";
  sc.robot = robot();
  sc.initial = initial_state();
  sc.momentum = Momentum::Zero();
  sc.target = Posed(kTargetPosition, kTargetAttitude);
  Posed start = forward_kinematics(sc.robot, sc.initial, 1);
  start.position += kGeometry.start_offset;
  sc.trajectory_start = start;
  sc.ramp_time = 4.0;
  sc.obstacle = Obstacle{kObstacle, 0.2};
  sc.planner.m = 0.1;
  sc.planner.T_c = 3.0;
  sc.planner.feedback_mode = FeedbackMode::predefined_time;
  sc.planner.damping = DampingParams{0.02, 0.08};
  sc.cdf.xi = 0.1;
  sc.cdf.delta = 17.25;
  sc.total_time = 20.0;
  sc.dt = 1e-3;
  sc.method = Method::predefined_time;
  return sc;
}

GaConfig reference_ga() {
  GaConfig g;
  g.population = 100;
  g.generations = 100;
  g.P_c = 0.6;
  g.P_m = 0.1;
  g.alpha = 0.35;
  g.beta = 0.65;
  g.gamma = 1e-4;
  g.danger_speed = 150.0 * kDeg;
  g.max_speed = 200.0 * kDeg;
  return g;
}

}  // namespace ffsr::reference
