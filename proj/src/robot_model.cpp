#include "ffsr/robot_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace ffsr {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("robot model: " + what);
}

void validate_inertia(const Matrix3d& I, const std::string& where) {
  require(I.allFinite(), where + " inertia is not finite");
  require((I - I.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + I.cwiseAbs().maxCoeff()),
          where + " inertia is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix3d> es(I, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() > 0.0, where + " inertia is not positive definite");
}

}  // namespace

double RobotModel::total_mass() const {
  double m = base_mass;
  for (const auto& arm : arms)
    for (const auto& link : arm.links) m += link.mass;
  return m;
}

void RobotModel::validate() const {
  require(base_mass > 0.0, "base mass must be positive");
  validate_inertia(base_inertia, "base");
  for (int a = 0; a < 2; ++a) {
    for (int i = 0; i < kArmJoints; ++i) {
      const LinkParam& link = arms[a].links[i];
      const std::string where = "arm " + std::to_string(a + 1) + " link " + std::to_string(i + 1);
      // Zero mass is allowed for limit studies; negative never is.
      require(link.mass >= 0.0, where + " mass must be non-negative");
      require(std::abs(link.axis.norm() - 1.0) < 1e-9, where + " axis must be unit-norm");
      require(link.offset.allFinite(), where + " offset is not finite");
      if (link.mass > 0.0) validate_inertia(link.inertia, where);
    }
  }
  require(total_mass() > 0.0, "total mass must be positive");
}

std::array<Vector3d, kArmJoints + 1> ArmFrames::polyline() const {
  std::array<Vector3d, kArmJoints + 1> pts;
  for (int i = 0; i < kArmJoints; ++i) pts[i] = joint_position[i];
  pts[kArmJoints] = end_effector.position;
  return pts;
}

ArmFrames arm_frames(const RobotModel& model, const SystemState& state, int arm) {
  const ArmModel& am = model.arms.at(arm - 1);
  const Vector6d& theta = state.theta(arm);
  ArmFrames f;
  Posed frame = state.base.compose(am.mount);
  for (int i = 0; i < kArmJoints; ++i) {
    const LinkParam& link = am.links[i];
    f.joint_position[i] = frame.position;
    f.joint_axis[i] = frame.attitude.rotate(link.axis);
    const UnitQuaterniond rot = frame.attitude * UnitQuaterniond::from_axis_angle(link.axis, theta(i));
    f.link_rotation[i] = rot.matrix();
    f.link_com[i] = frame.position + rot.rotate(link.com());
    frame = Posed(frame.position + rot.rotate(link.offset), rot);
  }
  f.end_effector = Posed(frame.position, frame.attitude * am.tool);
  return f;
}

Posed forward_kinematics(const RobotModel& model, const SystemState& state, int arm) {
  return arm_frames(model, state, arm).end_effector;
}

std::vector<Vector3d> body_points(const RobotModel& model, const SystemState& state, int arm,
                                  int samples_per_link) {
  if (samples_per_link < 2) throw std::invalid_argument("body_points: need >= 2 samples per link");
  const auto poly = arm_frames(model, state, arm).polyline();
  std::vector<Vector3d> pts;
  pts.reserve(static_cast<std::size_t>(kArmJoints * samples_per_link));
  for (int i = 0; i < kArmJoints; ++i) {
    for (int k = 0; k < samples_per_link; ++k) {
      const double s = static_cast<double>(k) / (samples_per_link - 1);
      pts.push_back(poly[i] + s * (poly[i + 1] - poly[i]));
    }
  }
  return pts;
}

Eigen::Matrix<double, 3, kArmJoints> point_jacobian(const ArmFrames& frames, int link,
                                                    const Vector3d& point) {
  Eigen::Matrix<double, 3, kArmJoints> J = Eigen::Matrix<double, 3, kArmJoints>::Zero();
  for (int k = 0; k <= link; ++k)
    J.col(k) = frames.joint_axis[k].cross(point - frames.joint_position[k]);
  return J;
}

namespace {

// Momentum-coupling columns of one arm, angular part about `ref`.
Matrix6d arm_coupling(const RobotModel& model, const ArmFrames& f, int arm, const Vector3d& ref) {
  const ArmModel& am = model.arms[arm - 1];
  Matrix6d H = Matrix6d::Zero();
  for (int k = 0; k < kArmJoints; ++k) {
    const Vector3d& a = f.joint_axis[k];
    Vector3d lin = Vector3d::Zero();
    Vector3d ang = Vector3d::Zero();
    for (int i = k; i < kArmJoints; ++i) {
      const LinkParam& link = am.links[i];
      if (link.mass == 0.0) continue;
      const Vector3d v = a.cross(f.link_com[i] - f.joint_position[k]);
      const Matrix3d Iw = f.link_rotation[i] * link.inertia * f.link_rotation[i].transpose();
      lin += link.mass * v;
      ang += Iw * a + link.mass * (f.link_com[i] - ref).cross(v);
    }
    H.col(k) << lin, ang;
  }
  return H;
}

}  // namespace

KinematicSnapshot snapshot(const RobotModel& model, const SystemState& state,
                           const Momentum& momentum) {
  KinematicSnapshot s;
  s.base = state.base;
  const Vector3d& pb = state.base.position;
  const Matrix3d Rb = state.base.attitude.matrix();

  const ArmFrames f1 = arm_frames(model, state, 1);
  const ArmFrames f2 = arm_frames(model, state, 2);
  s.end_effector1 = f1.end_effector;
  s.end_effector2 = f2.end_effector;

  // Composite inertia about the base CoM.
  double M = model.base_mass;
  Vector3d first_moment = Vector3d::Zero();
  Matrix3d I_total = Rb * model.base_inertia * Rb.transpose();
  for (int a = 0; a < 2; ++a) {
    const ArmFrames& f = a == 0 ? f1 : f2;
    for (int i = 0; i < kArmJoints; ++i) {
      const LinkParam& link = model.arms[a].links[i];
      if (link.mass == 0.0) continue;
      const Vector3d r = f.link_com[i] - pb;
      const Matrix3d rx = skew(r);
      M += link.mass;
      first_moment += link.mass * r;
      I_total += f.link_rotation[i] * link.inertia * f.link_rotation[i].transpose() -
                 link.mass * rx * rx;
    }
  }
  const Matrix3d cx = skew(first_moment);
  s.J_b.topLeftCorner<3, 3>() = M * Matrix3d::Identity();
  s.J_b.topRightCorner<3, 3>() = -cx;
  s.J_b.bottomLeftCorner<3, 3>() = cx;
  s.J_b.bottomRightCorner<3, 3>() = I_total;
  s.H_0 = s.J_b;

  s.J_c1 = arm_coupling(model, f1, 1, pb);
  s.J_c2 = arm_coupling(model, f2, 2, pb);

  const Vector3d P = momentum.head<3>();
  s.C << P, momentum.tail<3>() - pb.cross(P);

  const Vector3d& pe = f1.end_effector.position;
  for (int k = 0; k < kArmJoints; ++k) {
    s.J_m1.col(k) << f1.joint_axis[k].cross(pe - f1.joint_position[k]), f1.joint_axis[k];
  }
  s.J_0.setIdentity();
  s.J_0.topRightCorner<3, 3>() = -skew(pe - pb);
  return s;
}

Twistd base_twist_from_momentum(const KinematicSnapshot& snap, const Vector6d& theta_dot1,
                                const Vector6d& theta_dot2) {
  const Vector6d rhs = snap.C - snap.J_c1 * theta_dot1 - snap.J_c2 * theta_dot2;
  return Twistd(Vector6d(snap.J_b.ldlt().solve(rhs)));
}

Momentum system_momentum(const RobotModel& model, const SystemState& state,
                         const Twistd& base_twist, const Vector6d& theta_dot1,
                         const Vector6d& theta_dot2) {
  const Vector3d& pb = state.base.position;
  const Matrix3d Rb = state.base.attitude.matrix();
  const Vector3d& vb = base_twist.linear;
  const Vector3d& wb = base_twist.angular;

  Vector3d P = model.base_mass * vb;
  Vector3d L = Rb * model.base_inertia * Rb.transpose() * wb + pb.cross(model.base_mass * vb);

  for (int a = 1; a <= 2; ++a) {
    const ArmFrames f = arm_frames(model, state, a);
    const Vector6d& qd = a == 1 ? theta_dot1 : theta_dot2;
    Vector3d w = wb;
    for (int i = 0; i < kArmJoints; ++i) {
      const LinkParam& link = model.arms[a - 1].links[i];
      w += f.joint_axis[i] * qd(i);
      Vector3d v = vb + wb.cross(f.link_com[i] - pb);
      for (int k = 0; k <= i; ++k)
        v += f.joint_axis[k].cross(f.link_com[i] - f.joint_position[k]) * qd(k);
      const Matrix3d Iw = f.link_rotation[i] * link.inertia * f.link_rotation[i].transpose();
      P += link.mass * v;
      L += (link.mass == 0.0 ? Vector3d::Zero() : Vector3d(Iw * w)) +
           f.link_com[i].cross(link.mass * v);
    }
  }
  Momentum h;
  h << P, L;
  return h;
}

}  // namespace ffsr
