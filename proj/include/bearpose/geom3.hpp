#pragma once

#include <Eigen/Dense>

namespace bearpose {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Skew-symmetric matrix S with S*y = v x y for all y.
Mat3 skew(const Vec3& v);

/// Inverse of skew(). The input must be antisymmetric within 1e-9 per entry;
/// anything else signals a caller bug and throws std::invalid_argument.
Vec3 vex(const Mat3& s);

/// Antisymmetric part (A - A^T)/2, the projection onto so(3).
Mat3 antisymmetric_part(const Mat3& a);

/// vex of the antisymmetric part: 0.5*[c32-c23, c13-c31, c21-c12].
Vec3 psi(const Mat3& c);

/// 3x3 rotation matrix with validated orthonormality and unit determinant.
/// Construct through from_matrix (validate; throws) or project_from
/// (nearest rotation; for de-drifting nearly-orthonormal input).
class RotationMatrix {
 public:
  static constexpr double kOrthonormalityTol = 1e-9;

  RotationMatrix() : m_(Mat3::Identity()) {}

  static RotationMatrix identity() { return RotationMatrix(); }
  static RotationMatrix from_matrix(const Mat3& m);
  static RotationMatrix project_from(const Mat3& m);
  static bool is_valid(const Mat3& m, double tol = kOrthonormalityTol);

  const Mat3& matrix() const { return m_; }
  RotationMatrix transposed() const { return RotationMatrix(m_.transpose(), Unchecked{}); }
  RotationMatrix operator*(const RotationMatrix& o) const {
    return RotationMatrix(m_ * o.m_, Unchecked{});
  }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  /// R^T * v (inertial -> body).
  Vec3 rotate_back(const Vec3& v) const { return m_.transpose() * v; }

  double orthonormality_defect() const {
    return (m_.transpose() * m_ - Mat3::Identity()).norm();
  }

 private:
  struct Unchecked {};
  RotationMatrix(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;

  friend RotationMatrix exp_so3(const Vec3&);
  friend RotationMatrix angle_axis(double, const Vec3&);
  friend RotationMatrix project_to_rotation(const Mat3&);
};

/// Normalized distance to identity, |R|_I = sqrt(tr(I - R)/4), in [0, 1].
double rotation_distance(const RotationMatrix& r);

/// Rodrigues rotation about a unit axis. Non-unit axes are rejected.
RotationMatrix angle_axis(double angle, const Vec3& unit_axis);

/// Exponential map so(3) -> SO(3). Small angles (< 1e-8) use the Taylor
/// expansion of the sin/cos coefficients.
RotationMatrix exp_so3(const Vec3& w);

/// Orthogonal projector P_x = I - x*x^T/|x|^2 onto the plane normal to x.
Mat3 orthogonal_projector(const Vec3& x);

/// Nearest rotation in Frobenius norm (polar factor). Requires det(m) > 0;
/// singular or reflection-dominant input throws.
RotationMatrix project_to_rotation(const Mat3& m);

}  // namespace bearpose
