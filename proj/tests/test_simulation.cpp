#include <gtest/gtest.h>

#include <cmath>

#include "ffsr/simulation.hpp"
#include "test_support.hpp"

using namespace ffsr;
using ffsr::test::nominal_angles;
using ffsr::test::test_robot;

namespace {

SystemState home() {
  SystemState s;
  s.theta1 = nominal_angles();
  s.theta2 << -0.1, 1.2, 1.4, -0.3, -0.9, 1.0;
  return s;
}

// Short reach with a 1 cm initial tracking offset.
Scenario reach(Method method, double total_time = 6.0, double dt = 1e-3) {
  Scenario sc;
  sc.name = "reach";
  sc.robot = test_robot();
  sc.initial = home();
  const Posed ee = forward_kinematics(sc.robot, sc.initial, 1);
  Posed start = ee;
  start.position += Vector3d(0.01, 0.0, -0.005);
  sc.trajectory_start = start;
  sc.target = start;
  sc.target.position += Vector3d(0.02, 0.01, 0.0);
  sc.target.attitude = UnitQuaterniond::exp(Vector3d(0.0, 0.02, 0.0)) * start.attitude;
  sc.ramp_time = std::min(1.0, total_time / 4.0);
  sc.total_time = total_time;
  sc.dt = dt;
  sc.method = method;
  return sc;
}

}  // namespace

TEST(Method, NamesRoundTrip) {
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_THROW(parse_method("fastest"), std::invalid_argument);
}

TEST(Scenario, EffectivePlannerFollowsMethod) {
  Scenario sc = reach(Method::no_avoidance);
  EXPECT_EQ(sc.effective_planner().feedback_mode, FeedbackMode::none);
  sc.method = Method::no_feedback;
  EXPECT_EQ(sc.effective_planner().feedback_mode, FeedbackMode::none);
  sc.method = Method::proportional;
  EXPECT_EQ(sc.effective_planner().feedback_mode, FeedbackMode::proportional);
  sc.method = Method::predefined_time;
  EXPECT_EQ(sc.effective_planner().feedback_mode, FeedbackMode::predefined_time);
  sc.obstacle = Obstacle{};
  EXPECT_TRUE(sc.avoidance_enabled());
  sc.method = Method::no_avoidance;
  EXPECT_FALSE(sc.avoidance_enabled());
}

TEST(Scenario, RejectsBadStep) {
  Scenario sc = reach(Method::predefined_time);
  sc.dt = 0.0;
  EXPECT_THROW(sc.validate(), std::invalid_argument);
  sc = reach(Method::predefined_time);
  sc.dt = std::nan("");
  EXPECT_THROW(sc.validate(), std::invalid_argument);
}

TEST(Step, FixedPointWithoutErrors) {
  Scenario sc;
  sc.robot = test_robot();
  sc.initial = home();
  sc.target = forward_kinematics(sc.robot, sc.initial, 1);
  for (Method m : kAllMethods) {
    sc.method = m;
    const SystemState s = step(sc, sc.initial, 0.0, 1e-3);
    EXPECT_LT((s.theta1 - sc.initial.theta1).norm(), 1e-15);
    EXPECT_LT((s.theta2 - sc.initial.theta2).norm(), 1e-15);
    EXPECT_LT((s.base.position - sc.initial.base.position).norm(), 1e-15);
    EXPECT_LT(s.base.attitude.angle_to(sc.initial.base.attitude), 1e-15);
    EXPECT_DOUBLE_EQ(s.time, 1e-3);
  }
}

TEST(Run, GridAndRecordCount) {
  const Scenario sc = reach(Method::proportional, 1.0, 0.01);
  const RunResult r = run(sc);
  ASSERT_EQ(r.log.records.size(), sc.steps() + 1);
  EXPECT_EQ(sc.steps(), 100u);
  for (std::size_t k = 0; k < r.log.records.size(); ++k)
    EXPECT_NEAR(r.log.records[k].t, k * 0.01, 1e-12);
  EXPECT_FALSE(r.log.aborted);
}

TEST(Run, FourthOrderConvergence) {
  // Proportional feedback keeps the closed loop smooth over the segment.
  auto final_e1 = [](double dt) {
    const RunResult r = run(reach(Method::proportional, 0.8, dt));
    return r.log.records.back().e1.vector();
  };
  const Vector6d a = final_e1(0.04), b = final_e1(0.02), c = final_e1(0.01);
  const double ratio = (a - b).norm() / (b - c).norm();
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(Run, MomentumResidualStaysTiny) {
  Scenario sc = reach(Method::predefined_time, 2.0, 2e-3);
  sc.momentum << 0.3, -0.2, 0.1, 0.05, 0.02, -0.04;
  const RunResult r = run(sc);
  EXPECT_LE(r.metrics.max_momentum_residual, 1e-9 * (1.0 + sc.momentum.norm()));
}

TEST(Run, PredefinedTimeSettlesWithinTc) {
  const Scenario sc = reach(Method::predefined_time);
  const RunResult r = run(sc);
  ASSERT_TRUE(r.metrics.settling_time.has_value());
  EXPECT_LE(*r.metrics.settling_time, sc.planner.T_c);
  EXPECT_LT(r.metrics.final_position_error, 1e-6);
}

TEST(Run, FeedbackOrdering) {
  const RunResult nf = run(reach(Method::no_feedback));
  const RunResult pr = run(reach(Method::proportional));
  const RunResult pt = run(reach(Method::predefined_time));
  EXPECT_GT(nf.metrics.final_position_error, pr.metrics.final_position_error);
  EXPECT_GT(pr.metrics.final_position_error, 1e3 * pt.metrics.final_position_error);
}

TEST(Run, AbortSpeedStopsEarly) {
  const Scenario sc = reach(Method::predefined_time);
  RunOptions opt;
  opt.abort_speed = 1e-3;
  const RunResult r = run(sc, opt);
  EXPECT_TRUE(r.log.aborted);
  EXPECT_LT(r.log.records.size(), sc.steps() + 1);
}

TEST(Run, Deterministic) {
  const Scenario sc = reach(Method::predefined_time, 1.0);
  const RunResult a = run(sc), b = run(sc);
  ASSERT_EQ(a.log.records.size(), b.log.records.size());
  for (std::size_t k = 0; k < a.log.records.size(); ++k) {
    ASSERT_EQ(a.log.records[k].theta1, b.log.records[k].theta1);
    ASSERT_EQ(a.log.records[k].theta_dot2, b.log.records[k].theta_dot2);
  }
}

TEST(SettlingTime, ConstantZero) {
  EXPECT_EQ(settling_time({0.0, 0.1, 0.2}, {0.0, 0.0, 0.0}, 1e-6), 0.0);
}

TEST(SettlingTime, SingleCrossing) {
  std::vector<double> t, v;
  for (int k = 0; k <= 30; ++k) {
    t.push_back(0.1 * k);
    v.push_back(k < 12 ? 1.0 : 1e-9);
  }
  ASSERT_TRUE(settling_time(t, v, 1e-6).has_value());
  EXPECT_NEAR(*settling_time(t, v, 1e-6), 1.2, 1e-12);
}

TEST(SettlingTime, DipIsNotSettling) {
  std::vector<double> t, v;
  for (int k = 0; k <= 30; ++k) {
    t.push_back(0.1 * k);
    v.push_back((k >= 5 && k < 8) || k >= 20 ? 1e-9 : 1.0);
  }
  EXPECT_NEAR(*settling_time(t, v, 1e-6), 2.0, 1e-12);
}

TEST(SettlingTime, NeverSettled) {
  EXPECT_FALSE(settling_time({0.0, 1.0, 2.0}, {1.0, 1e-9, 1.0}, 1e-6).has_value());
}

TEST(Metrics, PeakSpeedAcrossArms) {
  Metrics m;
  m.max_joint_speed[0] = Vector6d::Constant(1.0);
  m.max_joint_speed[1] = Vector6d::Constant(0.5);
  m.max_joint_speed[1](3) = 2.0;
  EXPECT_EQ(m.peak_joint_speed(), 2.0);
}
