#include <gtest/gtest.h>

#include <random>

#include "ffsr/avoidance.hpp"
#include "test_support.hpp"

using namespace ffsr;
using ffsr::test::random_state;
using ffsr::test::test_robot;

namespace {

PlannerParams pt_params() {
  PlannerParams p;
  p.feedback_mode = FeedbackMode::predefined_time;
  return p;
}

Vector6d random_vector(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Vector6d::NullaryExpr([&](Eigen::Index) { return scale * u(rng); });
}

double sigma_min(const Matrix6d& J) { return Eigen::JacobiSVD<Matrix6d>(J).singularValues()(5); }

}  // namespace

TEST(MinDistance, SinglePoint) {
  const std::vector<Vector3d> pts{Vector3d(0.5, 0, 0)};
  const DistanceResult r = min_distance(pts, Obstacle{});
  EXPECT_EQ(r.distance, 0.5);
  EXPECT_EQ(r.index, 0u);
}

TEST(MinDistance, CenterOnSegment) {
  const std::vector<Vector3d> pts{Vector3d(-1, 0, 0), Vector3d(0.3, 0, 0), Vector3d(0.3, 2, 0)};
  Obstacle o;
  o.center = Vector3d(0.2, 0, 0);
  const DistanceResult r = min_distance(pts, o);
  EXPECT_NEAR(r.distance, 0.0, 1e-15);
  EXPECT_EQ(r.index, 1u);
}

TEST(MinDistance, MatchesDenseSampling) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemState s = random_state(rng);
    Obstacle o;
    o.center = Vector3d(u(rng), u(rng), u(rng)) + s.base.position;
    const auto poly = arm_frames(model, s, 1).polyline();
    const double exact = min_distance(poly, o).distance;
    const auto dense = body_points(model, s, 1, 1700);
    double brute = std::numeric_limits<double>::infinity();
    for (const Vector3d& p : dense) brute = std::min(brute, (p - o.center).norm());
    EXPECT_LE(exact, brute + 1e-15);
    EXPECT_NEAR(exact, brute, 1e-4);
    EXPECT_NEAR(closest_body_point(model, s, 1, o).distance, exact, 1e-14);
  }
}

TEST(DangerValue, BoundaryAndHandValue) {
  const CdfParams p;
  const Obstacle o;
  EXPECT_EQ(danger_value(0.2, p, o), 0.0);
  EXPECT_EQ(danger_value(0.7, p, o), 0.0);
  EXPECT_NEAR(danger_value(0.1, p, o), 2.5, 1e-12);
  EXPECT_EQ(danger_value(0.0, p, o), p.delta);
  EXPECT_EQ(danger_value(1e-4, p, o), p.delta);
}

TEST(DangerValue, MonotoneAndContinuous) {
  const CdfParams p;
  const Obstacle o;
  double prev = danger_value(1e-3, p, o);
  for (double d = 1e-3; d < 0.3; d += 1e-5) {
    const double v = danger_value(d, p, o);
    ASSERT_LE(v, prev) << d;
    ASSERT_LT(prev - v, 0.02) << d;
    prev = v;
  }
}

TEST(CdfParams, Validation) {
  CdfParams p;
  EXPECT_NO_THROW(p.validate());
  p.mu = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = CdfParams{};
  p.escape_gain = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(EscapeVelocity, ZeroOutsideDangerRadius) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(37);
  const SystemState s = random_state(rng);
  Obstacle o;
  o.center = s.base.position + Vector3d(5, 5, 5);
  EXPECT_EQ(escape_joint_velocity(model, s, 1, o, CdfParams{}), Vector6d::Zero());
}

TEST(EscapeVelocity, ProximalLinkOnlyMovesProximalJoints) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const SystemState s = random_state(rng);
    const ArmFrames f = arm_frames(model, s, 1);
    // Offset the obstacle sideways from the middle of link 3.
    const Vector3d mid = 0.5 * (f.joint_position[2] + f.joint_position[3]);
    const Vector3d along = (f.joint_position[3] - f.joint_position[2]).normalized();
    const Vector3d side = along.unitOrthogonal();
    Obstacle o;
    o.center = mid + 0.1 * side;
    const ClosestBodyPoint c = closest_body_point(f, o);
    if (c.link != 2) continue;
    const Vector6d v = escape_joint_velocity(model, s, 1, o, CdfParams{});
    EXPECT_GT(v.head<3>().norm(), 0.0);
    EXPECT_EQ(v.tail<3>(), Eigen::Vector3d::Zero());
  }
}

TEST(EscapeVelocity, SmallStepIncreasesDistance) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(43);
  int tested = 0;
  for (int trial = 0; trial < 40; ++trial) {
    SystemState s = random_state(rng);
    const ArmFrames f = arm_frames(model, s, 1);
    // Link 1 lies on the first joint axis, so joint 1 cannot move it.
    const int link = 1 + trial % 5;
    const Vector3d a = f.joint_position[link];
    const Vector3d b = link + 1 < kArmJoints ? f.joint_position[link + 1] : f.end_effector.position;
    Obstacle o;
    o.center = 0.5 * (a + b) + 0.12 * (b - a).normalized().unitOrthogonal();
    const double d0 = closest_body_point(f, o).distance;
    if (!(d0 < o.danger_radius)) continue;
    const Vector6d v = escape_joint_velocity(model, s, 1, o, CdfParams{});
    s.theta1 += 1e-4 * v;
    EXPECT_GT(closest_body_point(model, s, 1, o).distance, d0);
    ++tested;
  }
  EXPECT_GE(tested, 10);
}

TEST(AvoidanceMission, ZeroEscapeEqualsPlainLaw) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const KinematicSnapshot snap = snapshot(model, random_state(rng));
    PoseErrord e1;
    e1.e_p = Vector3d(0.01, -0.02, 0.005);
    e1.e_o = Vector3d(0.002, 0.0, -0.001);
    const Twistd Vd(Vector3d(0.01, 0, 0), Vector3d(0, 0.01, 0));
    const Twistd Vb(Vector3d(0, 0.001, 0), Vector3d(0.001, 0, 0));
    const Vector6d a = avoidance_mission_velocity(snap, e1, Vd, Vb, Vector6d::Zero(), CdfParams{}, pt_params());
    const Vector6d b = mission_arm_velocity(snap, e1, Vd, Vb, pt_params());
    EXPECT_LT((a - b).norm(), 1e-9);
  }
}

TEST(AvoidanceMission, FullProjectionKeepsTaskVelocity) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(53);
  CdfParams cdf;
  cdf.mu = 1.0;
  int tested = 0;
  while (tested < 100) {
    const KinematicSnapshot snap = snapshot(model, random_state(rng));
    if (sigma_min(snap.J_m1) < 1e-3) continue;
    ++tested;
    PoseErrord e1;
    e1.e_p = Vector3d(0.01, -0.02, 0.005);
    const Twistd Vd(Vector3d(0.01, 0, 0), Vector3d(0, 0.01, 0));
    const Vector6d escape = random_vector(rng, 1.0);
    const Vector6d with = avoidance_mission_velocity(snap, e1, Vd, Twistd{}, escape, cdf, pt_params());
    const Vector6d without = avoidance_mission_velocity(snap, e1, Vd, Twistd{}, Vector6d::Zero(), cdf, pt_params());
    EXPECT_LT((snap.J_m1 * (with - without)).norm(), 1e-9);
  }
}

TEST(AvoidanceMission, PureSelfMotion) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(59);
  const KinematicSnapshot snap = snapshot(model, random_state(rng));
  const Vector6d escape = random_vector(rng, 1.0);
  const CdfParams cdf;
  const Vector6d out = avoidance_mission_velocity(snap, PoseErrord{}, Twistd{}, Twistd{}, escape, cdf, pt_params());
  const Matrix6d P = nullspace_projector(snap.J_m1, cdf.mu, pt_params().damping);
  EXPECT_LT((out - P * escape).norm(), 1e-14);
}

TEST(AvoidanceBalance, ZeroEscapeEqualsPlainLaw) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const KinematicSnapshot snap = snapshot(model, random_state(rng));
    const Vector6d q1 = random_vector(rng, 0.2);
    PoseErrord e0;
    e0.e_p = Vector3d(1e-3, 0, -2e-3);
    const Vector6d a = avoidance_balance_velocity(snap, e0, q1, Vector6d::Zero(), CdfParams{}, pt_params());
    const Vector6d b = balance_arm_velocity(snap, e0, q1, pt_params());
    EXPECT_LT((a - b).norm(), 1e-9);
  }
}

TEST(AvoidanceBalance, FullProjectionKeepsBaseTwist) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(67);
  CdfParams cdf;
  cdf.mu = 1.0;
  int tested = 0;
  while (tested < 100) {
    const KinematicSnapshot snap = snapshot(model, random_state(rng));
    if (sigma_min(snap.J_c2) < 1e-3) continue;
    ++tested;
    const Vector6d q1 = random_vector(rng, 0.2);
    const Vector6d escape = random_vector(rng, 1.0);
    const Vector6d with = avoidance_balance_velocity(snap, PoseErrord{}, q1, escape, cdf, pt_params());
    const Vector6d without = avoidance_balance_velocity(snap, PoseErrord{}, q1, Vector6d::Zero(), cdf, pt_params());
    const Twistd a = base_twist_from_momentum(snap, q1, with);
    const Twistd b = base_twist_from_momentum(snap, q1, without);
    EXPECT_LT((a.vector() - b.vector()).norm(), 1e-8);
  }
}

TEST(AvoidanceBalance, NoProjectionAddsEscape) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(71);
  const KinematicSnapshot snap = snapshot(model, random_state(rng));
  CdfParams cdf;
  cdf.mu = 0.0;
  const Vector6d q1 = random_vector(rng, 0.2);
  const Vector6d escape = random_vector(rng, 1.0);
  const Vector6d out = avoidance_balance_velocity(snap, PoseErrord{}, q1, escape, cdf, pt_params());
  const Vector6d task = balance_arm_velocity(snap, PoseErrord{}, q1, pt_params());
  EXPECT_LT((out - task - escape).norm(), 1e-14);
}
