#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "ffsr/robot_model.hpp"
#include "test_support.hpp"

using namespace ffsr;
using ffsr::test::random_state;
using ffsr::test::test_robot;

namespace {

using Matrix4d = Eigen::Matrix4d;

Matrix4d homogeneous(const Matrix3d& R, const Vector3d& p) {
  Matrix4d T = Matrix4d::Identity();
  T.topLeftCorner<3, 3>() = R;
  T.topRightCorner<3, 1>() = p;
  return T;
}

// Plain 4x4 transform chain, written without the library's frame helpers.
Matrix4d chain_end_effector(const RobotModel& model, const SystemState& s, int arm) {
  const ArmModel& am = model.arms[arm - 1];
  Matrix4d T = homogeneous(s.base.attitude.matrix(), s.base.position) *
               homogeneous(am.mount.attitude.matrix(), am.mount.position);
  for (int i = 0; i < kArmJoints; ++i) {
    const Matrix3d R = Eigen::AngleAxisd(s.theta(arm)(i), am.links[i].axis).toRotationMatrix();
    T = T * homogeneous(R, Vector3d::Zero()) * homogeneous(Matrix3d::Identity(), am.links[i].offset);
  }
  return T * homogeneous(am.tool.matrix(), Vector3d::Zero());
}

// Per-body mass points and rotations, for finite-difference momentum.
struct Bodies {
  std::vector<double> mass;
  std::vector<Vector3d> com;
  std::vector<Matrix3d> R;
  std::vector<Matrix3d> inertia;
};

Bodies bodies(const RobotModel& model, const SystemState& s) {
  Bodies b;
  b.mass.push_back(model.base_mass);
  b.com.push_back(s.base.position);
  b.R.push_back(s.base.attitude.matrix());
  b.inertia.push_back(model.base_inertia);
  for (int arm = 1; arm <= 2; ++arm) {
    const ArmModel& am = model.arms[arm - 1];
    Matrix4d T = homogeneous(s.base.attitude.matrix(), s.base.position) *
                 homogeneous(am.mount.attitude.matrix(), am.mount.position);
    for (int i = 0; i < kArmJoints; ++i) {
      T = T * homogeneous(Eigen::AngleAxisd(s.theta(arm)(i), am.links[i].axis).toRotationMatrix(),
                          Vector3d::Zero());
      const Matrix3d R = T.topLeftCorner<3, 3>();
      b.mass.push_back(am.links[i].mass);
      b.com.push_back(T.topRightCorner<3, 1>() + R * (0.5 * am.links[i].offset));
      b.R.push_back(R);
      b.inertia.push_back(am.links[i].inertia);
      T = T * homogeneous(Matrix3d::Identity(), am.links[i].offset);
    }
  }
  return b;
}

SystemState advance(SystemState s, const Twistd& vb, const Vector6d& q1, const Vector6d& q2,
                    double h) {
  s.base.position += h * vb.linear;
  s.base.attitude = UnitQuaterniond::exp(h * vb.angular) * s.base.attitude;
  s.theta1 += h * q1;
  s.theta2 += h * q2;
  return s;
}

Vector3d vee(const Matrix3d& W) { return Vector3d(W(2, 1), W(0, 2), W(1, 0)); }

// Momentum from central differences of body positions and orientations.
Momentum finite_difference_momentum(const RobotModel& model, const SystemState& s,
                                    const Twistd& vb, const Vector6d& q1, const Vector6d& q2) {
  const double h = 1e-6;
  const Bodies p = bodies(model, advance(s, vb, q1, q2, h));
  const Bodies m = bodies(model, advance(s, vb, q1, q2, -h));
  const Bodies c = bodies(model, s);
  Vector3d P = Vector3d::Zero(), L = Vector3d::Zero();
  for (std::size_t i = 0; i < c.mass.size(); ++i) {
    const Vector3d v = (p.com[i] - m.com[i]) / (2 * h);
    const Matrix3d Rdot = (p.R[i] - m.R[i]) / (2 * h);
    const Vector3d w = vee(Rdot * c.R[i].transpose());
    P += c.mass[i] * v;
    L += c.mass[i] * c.com[i].cross(v) + c.R[i] * c.inertia[i] * c.R[i].transpose() * w;
  }
  Momentum out;
  out << P, L;
  return out;
}

Vector6d random_rates(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector6d v;
  for (int i = 0; i < 6; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

TEST(ForwardKinematics, ZeroConfigurationIsChainSum) {
  const RobotModel model = test_robot();
  SystemState s;
  const ArmModel& am = model.arms[0];
  Vector3d expected = am.mount.position;
  for (const LinkParam& l : am.links) expected += am.mount.attitude.rotate(l.offset);
  EXPECT_LT((forward_kinematics(model, s, 1).position - expected).norm(), 1e-14);
}

TEST(ForwardKinematics, MatchesHomogeneousChain) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const SystemState s = random_state(rng, 2.0);
    for (int arm = 1; arm <= 2; ++arm) {
      const Matrix4d T = chain_end_effector(model, s, arm);
      const Posed p = forward_kinematics(model, s, arm);
      EXPECT_LT((p.position - T.topRightCorner<3, 1>()).norm(), 1e-12);
      EXPECT_LT((p.attitude.matrix() - T.topLeftCorner<3, 3>()).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(ForwardKinematics, JointOneHalfTurnMirrorsAboutItsAxis) {
  const RobotModel model = test_robot();
  SystemState s;
  const Posed p0 = forward_kinematics(model, s, 1);
  s.theta1(0) = M_PI;
  const Posed p1 = forward_kinematics(model, s, 1);
  const ArmFrames f = arm_frames(model, s, 1);
  const Vector3d o = f.joint_position[0], a = f.joint_axis[0];
  auto radial = [&](const Vector3d& x) {
    const Vector3d r = x - o;
    return Vector3d(r - a.dot(r) * a);
  };
  EXPECT_LT((radial(p1.position) + radial(p0.position)).norm(), 1e-12);
  EXPECT_NEAR(a.dot(p1.position - o), a.dot(p0.position - o), 1e-12);
}

TEST(Snapshot, MissionJacobianMatchesFiniteDifference) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemState s = random_state(rng);
    const KinematicSnapshot snap = snapshot(model, s);
    const Vector6d qd = random_rates(rng);
    const Twistd vb(Vector3d(0.1, -0.2, 0.05), Vector3d(0.03, 0.02, -0.04));
    const double h = 1e-6;
    const Posed a = forward_kinematics(model, advance(s, vb, qd, Vector6d::Zero(), h), 1);
    const Posed b = forward_kinematics(model, advance(s, vb, qd, Vector6d::Zero(), -h), 1);
    Vector6d fd;
    fd.head<3>() = (a.position - b.position) / (2 * h);
    fd.tail<3>() = (a.attitude * b.attitude.inverse()).log() / (2 * h);
    const Vector6d model_twist = snap.J_0 * vb.vector() + snap.J_m1 * qd;
    EXPECT_LT((fd - model_twist).norm(), 1e-7) << "trial " << trial;
  }
}

TEST(Snapshot, BaseInertiaSymmetricPositiveDefinite) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const KinematicSnapshot snap = snapshot(model, random_state(rng));
    EXPECT_LT((snap.J_b - snap.J_b.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix6d> eig(snap.J_b);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Snapshot, MasslessArmHasNoCoupling) {
  RobotModel model = test_robot();
  for (LinkParam& l : model.arms[1].links) {
    l.mass = 0.0;
    l.inertia.setZero();
  }
  std::mt19937_64 rng(4);
  const KinematicSnapshot snap = snapshot(model, random_state(rng));
  EXPECT_TRUE(snap.J_c2.isZero(0.0));
}

TEST(Momentum, MatchesFiniteDifferenceOfBodies) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemState s = random_state(rng);
    const Twistd vb(Vector6d(0.1 * random_rates(rng)));
    const Vector6d q1 = random_rates(rng), q2 = random_rates(rng);
    const Momentum oracle = finite_difference_momentum(model, s, vb, q1, q2);
    const Momentum lib = system_momentum(model, s, vb, q1, q2);
    EXPECT_LT((oracle - lib).norm(), 1e-6 * (1.0 + oracle.norm())) << "trial " << trial;
  }
}

TEST(BaseTwist, ZeroRatesZeroMomentumGiveZeroTwist) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(6);
  const KinematicSnapshot snap = snapshot(model, random_state(rng));
  const Twistd v = base_twist_from_momentum(snap, Vector6d::Zero(), Vector6d::Zero());
  EXPECT_EQ(v.vector(), Vector6d::Zero());
}

TEST(BaseTwist, ArmMotionMovesTheBase) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(7);
  const KinematicSnapshot snap = snapshot(model, random_state(rng));
  const Twistd v = base_twist_from_momentum(snap, random_rates(rng), Vector6d::Zero());
  EXPECT_GT(v.vector().norm(), 1e-4);
}

TEST(BaseTwist, ConservesPrescribedMomentum) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemState s = random_state(rng);
    const Momentum C = 3.0 * random_rates(rng);
    const KinematicSnapshot snap = snapshot(model, s, C);
    const Vector6d q1 = random_rates(rng), q2 = random_rates(rng);
    const Twistd vb = base_twist_from_momentum(snap, q1, q2);
    const Vector6d recon = snap.J_b * vb.vector() + snap.J_c1 * q1 + snap.J_c2 * q2;
    EXPECT_LT((recon - snap.C).norm(), 1e-10 * (1.0 + snap.C.norm()));
    EXPECT_LT((system_momentum(model, s, vb, q1, q2) - C).norm(), 1e-10 * (1.0 + C.norm()));
  }
}

TEST(BodyPoints, EndpointsOnThePolyline) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(9);
  const SystemState s = random_state(rng);
  const auto pts = body_points(model, s, 1);
  ASSERT_EQ(pts.size(), 12u);
  const auto poly = arm_frames(model, s, 1).polyline();
  for (int i = 0; i < kArmJoints; ++i) {
    EXPECT_LT((pts[2 * i] - poly[i]).norm(), 1e-15);
    EXPECT_LT((pts[2 * i + 1] - poly[i + 1]).norm(), 1e-15);
  }
}

TEST(BodyPoints, DenseSamplesLieOnSegments) {
  const RobotModel model = test_robot();
  std::mt19937_64 rng(10);
  const SystemState s = random_state(rng);
  const auto poly = arm_frames(model, s, 2).polyline();
  const auto pts = body_points(model, s, 2, 7);
  ASSERT_EQ(pts.size(), 42u);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const int i = static_cast<int>(k / 7);
    const Vector3d d = poly[i + 1] - poly[i];
    const Vector3d r = pts[k] - poly[i];
    EXPECT_LT((r - r.dot(d) / d.squaredNorm() * d).norm(), 1e-12);
  }
  EXPECT_THROW(body_points(model, s, 1, 1), std::invalid_argument);
}

TEST(RobotModel, RejectsBadParameters) {
  RobotModel model = test_robot();
  EXPECT_NO_THROW(model.validate());
  model.arms[0].links[2].axis = Vector3d(1, 1, 0);
  EXPECT_THROW(model.validate(), std::invalid_argument);
  model = test_robot();
  model.base_mass = -1.0;
  EXPECT_THROW(model.validate(), std::invalid_argument);
}
