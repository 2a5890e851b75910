#pragma once

// Spatial-math primitives shared by every module: unit quaternions, poses,
// twists, pose errors and the singularity-robust inverses.

#include <algorithm>
#include <cmath>
#include <type_traits>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace ffsr {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;

using Vector3d = Vector3<double>;
using Vector6d = Vector6<double>;
using Matrix3d = Matrix3<double>;
using Matrix6d = Matrix6<double>;

template <typename Derived>
Matrix3<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  Matrix3<S> m;
  m << S(0), -v(2), v(1),
       v(2), S(0), -v(0),
       -v(1), v(0), S(0);
  return m;
}

/// Rotation stored as a unit quaternion. Every constructor renormalizes, so
/// the norm invariant holds after any operation that builds a new value.
template <typename Scalar>
class UnitQuaternion {
 public:
  using Quat = Eigen::Quaternion<Scalar>;

  UnitQuaternion() : q_(Quat::Identity()) {}
  UnitQuaternion(Scalar w, Scalar x, Scalar y, Scalar z) : q_(w, x, y, z) {
    q_.normalize();
  }
  explicit UnitQuaternion(const Quat& q) : q_(q) { q_.normalize(); }

  static UnitQuaternion identity() { return UnitQuaternion(); }

  static UnitQuaternion from_axis_angle(const Vector3<Scalar>& axis, Scalar angle) {
    return UnitQuaternion(Quat(Eigen::AngleAxis<Scalar>(angle, axis.normalized())));
  }

  /// exp of a rotation vector (axis * angle).
  static UnitQuaternion exp(const Vector3<Scalar>& rotvec) {
    const Scalar angle = rotvec.norm();
    const Scalar half = angle / Scalar(2);
    // sin(half)/angle -> 1/2 as angle -> 0
    Scalar k;
    if (angle < Scalar(1e-8)) {
      k = Scalar(0.5) - angle * angle / Scalar(48);
    } else {
      k = std::sin(half) / angle;
    }
    return UnitQuaternion(std::cos(half), k * rotvec(0), k * rotvec(1), k * rotvec(2));
  }

  Scalar w() const { return q_.w(); }
  Scalar x() const { return q_.x(); }
  Scalar y() const { return q_.y(); }
  Scalar z() const { return q_.z(); }
  Vector3<Scalar> vec() const { return q_.vec(); }
  const Quat& quaternion() const { return q_; }
  Matrix3<Scalar> matrix() const { return q_.toRotationMatrix(); }
  Eigen::Matrix<Scalar, 4, 1> coeffs_wxyz() const {
    return Eigen::Matrix<Scalar, 4, 1>(q_.w(), q_.x(), q_.y(), q_.z());
  }

  UnitQuaternion inverse() const { return UnitQuaternion(q_.conjugate()); }

  /// Same rotation, representative with w >= 0.
  UnitQuaternion canonical() const {
    return q_.w() < Scalar(0) ? UnitQuaternion(Quat(-q_.w(), -q_.x(), -q_.y(), -q_.z()))
                              : *this;
  }

  /// Rotation vector (axis * angle) of the canonical representative.
  Vector3<Scalar> log() const {
    const UnitQuaternion c = canonical();
    const Scalar s = c.vec().norm();
    if (s < Scalar(1e-12)) return Scalar(2) * c.vec();
    return (Scalar(2) * std::atan2(s, c.w()) / s) * c.vec();
  }

  Scalar angle_to(const UnitQuaternion& other) const {
    return (other * inverse()).log().norm();
  }

  Vector3<Scalar> rotate(const Vector3<Scalar>& v) const { return q_ * v; }

  friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
    return UnitQuaternion(a.q_ * b.q_);
  }

 private:
  Quat q_;
};

template <typename Scalar>
struct Pose {
  Vector3<Scalar> position = Vector3<Scalar>::Zero();
  UnitQuaternion<Scalar> attitude;

  Pose() = default;
  Pose(const Vector3<Scalar>& p, const UnitQuaternion<Scalar>& q) : position(p), attitude(q) {}

  /// this * other, treating both as rigid transforms.
  Pose compose(const Pose& other) const {
    return Pose(position + attitude.rotate(other.position), attitude * other.attitude);
  }
  Vector3<Scalar> transform(const Vector3<Scalar>& p) const {
    return position + attitude.rotate(p);
  }
};

/// Linear (m/s) and angular (rad/s) velocity, both in the inertial frame.
template <typename Scalar>
struct Twist {
  Vector3<Scalar> linear = Vector3<Scalar>::Zero();
  Vector3<Scalar> angular = Vector3<Scalar>::Zero();

  Twist() = default;
  Twist(const Vector3<Scalar>& v, const Vector3<Scalar>& w) : linear(v), angular(w) {}
  explicit Twist(const Vector6<Scalar>& x) : linear(x.template head<3>()), angular(x.template tail<3>()) {}

  static Twist zero() { return Twist(); }

  Vector6<Scalar> vector() const {
    Vector6<Scalar> x;
    x << linear, angular;
    return x;
  }
  bool all_finite() const { return linear.allFinite() && angular.allFinite(); }
};

template <typename Scalar>
struct PoseError {
  Vector3<Scalar> e_p = Vector3<Scalar>::Zero();
  Vector3<Scalar> e_o = Vector3<Scalar>::Zero();

  Vector6<Scalar> vector() const {
    Vector6<Scalar> x;
    x << e_p, e_o;
    return x;
  }
  Scalar norm() const { return vector().norm(); }
};

using UnitQuaterniond = UnitQuaternion<double>;
using Posed = Pose<double>;
using Twistd = Twist<double>;
using PoseErrord = PoseError<double>;

/// e_p = desired - actual, e_o = 2 vec(q_d * q_a^-1) on the w >= 0 branch.
template <typename Scalar>
PoseError<Scalar> pose_error(const Pose<Scalar>& desired, const Pose<Scalar>& actual) {
  PoseError<Scalar> e;
  e.e_p = desired.position - actual.position;
  const UnitQuaternion<Scalar> q_err =
      (desired.attitude * actual.attitude.inverse()).canonical();
  e.e_o = Scalar(2) * q_err.vec();
  return e;
}

/// Maps relating twists to the rate of a pose error e = pose_error(d, a):
///   de/dt = desired_map * V_d - actual_map * V_a.
/// Position blocks are identity; the attitude blocks follow from
/// d/dt 2 vec(q_d q_a^-1) with inertial-frame angular velocities.
template <typename Scalar>
struct ErrorRateMaps {
  Matrix6<Scalar> actual_map;   // J_e
  Matrix6<Scalar> desired_map;  // J_ed
};

template <typename Scalar>
ErrorRateMaps<Scalar> error_rate_maps(const PoseError<Scalar>& e) {
  // Recover (w, v) of the canonical error quaternion from e_o = 2 v.
  const Vector3<Scalar> v = e.e_o / Scalar(2);
  const Scalar w = std::sqrt(std::max(Scalar(0), Scalar(1) - v.squaredNorm()));
  const Matrix3<Scalar> I = Matrix3<Scalar>::Identity();
  ErrorRateMaps<Scalar> maps;
  maps.actual_map.setIdentity();
  maps.desired_map.setIdentity();
  maps.actual_map.template bottomRightCorner<3, 3>() = w * I + skew(v);
  maps.desired_map.template bottomRightCorner<3, 3>() = w * I - skew(v);
  return maps;
}

struct DampingParams {
  double eps = 0.02;         // singular-value threshold where damping starts
  double lambda_max = 0.08;  // damping at sigma = 0
};

/// Damped least-squares inverse with a per-direction variable damping:
///   J^+ = sum_i s_i / (s_i^2 + l_i^2) v_i u_i^T,
///   l_i^2 = lambda_max^2 (1 - (s_i/eps)^2) for s_i < eps, 0 otherwise.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::ColsAtCompileTime, Derived::RowsAtCompileTime>
damped_pinv(const Eigen::MatrixBase<Derived>& J, typename Derived::Scalar eps,
            typename Derived::Scalar lambda_max) {
  using S = typename Derived::Scalar;
  using Plain = Eigen::Matrix<S, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  Eigen::JacobiSVD<Plain> svd(J.eval(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  auto sigma = svd.singularValues();
  Eigen::Matrix<S, Eigen::Dynamic, 1> gain(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const S s = sigma(i);
    S lambda2 = S(0);
    if (s < eps) {
      const S r = s / eps;
      lambda2 = lambda_max * lambda_max * (S(1) - r * r);
    }
    const S den = s * s + lambda2;
    gain(i) = den > S(0) ? s / den : S(0);
  }
  const Eigen::Index k = sigma.size();
  return svd.matrixV().leftCols(k) * gain.asDiagonal() * svd.matrixU().leftCols(k).transpose();
}

template <typename Derived>
auto damped_pinv(const Eigen::MatrixBase<Derived>& J, const DampingParams& p) {
  using S = typename Derived::Scalar;
  return damped_pinv(J, S(p.eps), S(p.lambda_max));
}

/// P = E - mu J^T (J J^T)^-1 J. Falls back to the damped inverse in place of
/// J^T (J J^T)^-1 when J J^T is ill-conditioned beyond 1e12.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::ColsAtCompileTime, Derived::ColsAtCompileTime>
nullspace_projector(const Eigen::MatrixBase<Derived>& J, typename Derived::Scalar mu,
                    const DampingParams& damping = {}) {
  using S = typename Derived::Scalar;
  constexpr int N = Derived::ColsAtCompileTime;
  using Square = Eigen::Matrix<S, N, N>;
  const Eigen::Index n = J.cols();
  Square P = Square::Identity(n, n);
  if (mu == S(0)) return P;

  const auto JJt = (J * J.transpose()).eval();
  Eigen::JacobiSVD<std::decay_t<decltype(JJt)>> svd(JJt);
  const auto& s = svd.singularValues();
  const S smax = s(0);
  const S smin = s(s.size() - 1);
  const bool well_conditioned = smin > S(0) && smax / smin <= S(1e12);
  if (well_conditioned) {
    P.noalias() -= mu * (J.transpose() * JJt.fullPivLu().solve(J.eval()));
  } else {
    P.noalias() -= mu * (damped_pinv(J, damping) * J);
  }
  return P;
}

}  // namespace ffsr
