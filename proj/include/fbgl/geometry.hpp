#ifndef FBGL_GEOMETRY_HPP
#define FBGL_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fbgl/errors.hpp"

namespace fbgl {

// Rigid transform in SE(3). Translations are in millimetres.
template <typename Scalar>
struct Transform {
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  static Transform identity() { return {}; }
  static Transform fromRotation(const Matrix3& r) { return {r, Vector3::Zero()}; }
  static Transform fromTranslation(const Vector3& p) { return {Matrix3::Identity(), p}; }

  Transform inverse() const {
    Matrix3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  Vector3 operator*(const Vector3& p) const { return rotation * p + translation; }

  Matrix4 matrix() const {
    Matrix4 m = Matrix4::Identity();
    m.template topLeftCorner<3, 3>() = rotation;
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }

  // Largest entry of |R^T R - I|.
  Scalar orthonormalityError() const {
    return (rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff();
  }

  bool isValid(Scalar tol = Scalar(1e-9)) const {
    return rotation.allFinite() && translation.allFinite() && orthonormalityError() <= tol &&
           std::abs(rotation.determinant() - Scalar(1)) <= tol;
  }
};

using Transformd = Transform<double>;

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rotZ(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Eigen::Matrix<Scalar, 3, 1>::UnitZ()).toRotationMatrix();
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rotY(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Eigen::Matrix<Scalar, 3, 1>::UnitY()).toRotationMatrix();
}

// Gram-Schmidt on the columns, keeping the first column's direction.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> orthonormalize(const Eigen::MatrixBase<Derived>& r) {
  using Vector3 = Eigen::Matrix<typename Derived::Scalar, 3, 1>;
  Vector3 x = r.col(0).normalized();
  Vector3 y = (r.col(1) - x.dot(r.col(1)) * x).normalized();
  Eigen::Matrix<typename Derived::Scalar, 3, 3> out;
  out << x, y, x.cross(y);
  return out;
}

// Rotation drift above this is removed after composition.
inline constexpr double kOrthonormalityTolerance = 1e-9;

template <typename Scalar>
Transform<Scalar> compose(const Transform<Scalar>& a, const Transform<Scalar>& b) {
  Transform<Scalar> out{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  if (out.orthonormalityError() > Scalar(kOrthonormalityTolerance)) {
    out.rotation = orthonormalize(out.rotation);
  }
  return out;
}

template <typename Scalar>
Transform<Scalar> operator*(const Transform<Scalar>& a, const Transform<Scalar>& b) {
  return compose(a, b);
}

// One FBG-section of the fiber: constant curvature over arc_length, followed
// by a twist about the local z axis.
template <typename Scalar>
struct SectionArc {
  Scalar curvature = 0;   // 1/mm
  Scalar twist = 0;       // rad
  Scalar arc_length = 0;  // mm, > 0
};

using SectionArcd = SectionArc<double>;

// Below this bend angle the chord uses its second-order series.
inline constexpr double kSmallBendAngle = 1e-6;

template <typename Scalar>
Transform<Scalar> section_transform(const SectionArc<Scalar>& arc) {
  using std::cos;
  using std::isfinite;
  using std::sin;
  if (!isfinite(arc.curvature) || !isfinite(arc.twist) || !isfinite(arc.arc_length)) {
    throw InvalidArgument("section_transform: non-finite arc parameter");
  }
  if (!(arc.arc_length > Scalar(0))) {
    throw InvalidArgument("section_transform: arc length must be positive");
  }

  const Scalar theta = arc.curvature * arc.arc_length;
  Eigen::Matrix<Scalar, 3, 1> p;
  if (std::abs(theta) < Scalar(kSmallBendAngle)) {
    p << arc.curvature * arc.arc_length * arc.arc_length / Scalar(2), Scalar(0), arc.arc_length;
  } else {
    // rho (1 - cos theta) written as 2 rho sin^2(theta / 2) to avoid
    // cancellation for shallow bends.
    const Scalar rho = Scalar(1) / arc.curvature;
    const Scalar half = sin(theta / Scalar(2));
    p << Scalar(2) * rho * half * half, Scalar(0), rho * sin(theta);
  }
  return {rotZ(arc.twist) * rotY(theta), p};
}

// Poses of every section, composed left to right from base. Element i is the
// pose at the distal end of arcs[i].
template <typename Scalar>
std::vector<Transform<Scalar>> reconstruct_shape(std::span<const SectionArc<Scalar>> arcs,
                                                 const Transform<Scalar>& base) {
  if (arcs.empty()) throw InvalidArgument("reconstruct_shape: empty section sequence");
  std::vector<Transform<Scalar>> poses;
  poses.reserve(arcs.size());
  Transform<Scalar> pose = base;
  for (const auto& arc : arcs) {
    pose = compose(pose, section_transform(arc));
    poses.push_back(pose);
  }
  return poses;
}

template <typename Scalar>
std::vector<Transform<Scalar>> reconstruct_shape(const std::vector<SectionArc<Scalar>>& arcs,
                                                 const Transform<Scalar>& base) {
  return reconstruct_shape(std::span<const SectionArc<Scalar>>(arcs), base);
}

// Tip of a single constant-curvature arc of length L bending in the plane at
// azimuth phi.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> cc_arc_endpoint(Scalar curvature, Scalar plane, Scalar length) {
  using std::cos;
  using std::sin;
  if (!(length >= Scalar(0))) throw InvalidArgument("cc_arc_endpoint: negative arc length");
  const Scalar theta = curvature * length;
  Scalar radial;
  Scalar axial;
  if (std::abs(theta) < Scalar(kSmallBendAngle)) {
    radial = curvature * length * length / Scalar(2);
    axial = length;
  } else {
    const Scalar half = sin(theta / Scalar(2));
    radial = Scalar(2) * half * half / curvature;
    axial = sin(theta) / curvature;
  }
  return {radial * cos(plane), radial * sin(plane), axial};
}

template <typename Scalar>
struct BendAngles {
  Scalar bend;   // theta, rad
  Scalar plane;  // phi, rad; 0 for a straight arc
};

template <typename Derived>
BendAngles<typename Derived::Scalar> cc_angles_from_endpoint(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  using std::atan2;
  using std::hypot;
  if (!p.allFinite()) throw InvalidArgument("cc_angles_from_endpoint: non-finite endpoint");
  if (p.norm() == Scalar(0)) throw DegenerateInput("cc_angles_from_endpoint: zero endpoint");
  const Scalar radial = hypot(p(0), p(1));
  const Scalar bend = Scalar(2) * atan2(radial, p(2));
  const Scalar plane = radial == Scalar(0) ? Scalar(0) : atan2(p(1), p(0));
  return {bend, plane};
}

// Wraps to (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  a = std::remainder(a, Scalar(2) * kPi);
  if (a <= -kPi) a += Scalar(2) * kPi;
  return a;
}

}  // namespace fbgl

#endif  // FBGL_GEOMETRY_HPP
