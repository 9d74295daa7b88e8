#include "bearpose/geom3.hpp"

#include <cmath>
#include <stdexcept>

namespace bearpose {

namespace {

void require_finite(const Vec3& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite components");
  }
}

void require_finite(const Mat3& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite components");
  }
}

}  // namespace

Mat3 skew(const Vec3& v) {
  require_finite(v, "skew");
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

Vec3 vex(const Mat3& s) {
  require_finite(s, "vex");
  const double defect = (s + s.transpose()).cwiseAbs().maxCoeff();
  if (s.diagonal().cwiseAbs().maxCoeff() > 1e-9 || defect > 1e-9) {
    throw std::invalid_argument("vex: matrix is not antisymmetric");
  }
  return Vec3(s(2, 1), s(0, 2), s(1, 0));
}

Mat3 antisymmetric_part(const Mat3& a) {
  require_finite(a, "antisymmetric_part");
  return 0.5 * (a - a.transpose());
}

Vec3 psi(const Mat3& c) {
  require_finite(c, "psi");
  return 0.5 * Vec3(c(2, 1) - c(1, 2), c(0, 2) - c(2, 0), c(1, 0) - c(0, 1));
}

bool RotationMatrix::is_valid(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  const double defect = (m.transpose() * m - Mat3::Identity()).norm();
  return defect <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

RotationMatrix RotationMatrix::from_matrix(const Mat3& m) {
  if (!is_valid(m)) {
    throw std::invalid_argument("RotationMatrix: input is not a rotation matrix");
  }
  return RotationMatrix(m, Unchecked{});
}

RotationMatrix RotationMatrix::project_from(const Mat3& m) {
  return project_to_rotation(m);
}

double rotation_distance(const RotationMatrix& r) {
  double sq = 0.25 * (Mat3::Identity() - r.matrix()).trace();
  if (sq < 1e-8) {
    // Near the identity the trace cancels catastrophically (the square root
    // amplifies a one-ulp trace error to ~1e-8) and round-off drift of long
    // products can push it slightly negative. On SO(3) the same value is
    // ||I - R||_F^2 / 8, exact entrywise here and never negative.
    const double fro = 0.125 * (Mat3::Identity() - r.matrix()).squaredNorm();
    if (sq < -1e-12 && fro > 2e-12) {
      // The two routes disagree by more than orthonormality drift allows.
      throw std::domain_error("rotation_distance: negative radicand beyond tolerance");
    }
    sq = fro;
  }
  if (sq > 1.0) sq = 1.0;
  return std::sqrt(sq);
}

RotationMatrix angle_axis(double angle, const Vec3& unit_axis) {
  require_finite(unit_axis, "angle_axis");
  if (!std::isfinite(angle)) {
    throw std::invalid_argument("angle_axis: non-finite angle");
  }
  if (std::abs(unit_axis.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("angle_axis: axis must be a unit vector");
  }
  const Mat3 k = skew(unit_axis);
  const Mat3 r = Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
  return RotationMatrix(r, RotationMatrix::Unchecked{});
}

RotationMatrix exp_so3(const Vec3& w) {
  require_finite(w, "exp_so3");
  const double theta_sq = w.squaredNorm();
  const double theta = std::sqrt(theta_sq);
  double a;  // sin(theta)/theta
  double b;  // (1 - cos(theta))/theta^2
  if (theta < 1e-8) {
    a = 1.0 - theta_sq / 6.0;
    b = 0.5 - theta_sq / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta_sq;
  }
  const Mat3 k = skew(w);
  const Mat3 r = Mat3::Identity() + a * k + b * k * k;
  return RotationMatrix(r, RotationMatrix::Unchecked{});
}

Mat3 orthogonal_projector(const Vec3& x) {
  require_finite(x, "orthogonal_projector");
  const double n2 = x.squaredNorm();
  if (n2 <= 0.0) {
    throw std::invalid_argument("orthogonal_projector: zero vector");
  }
  return Mat3::Identity() - (x * x.transpose()) / n2;
}

RotationMatrix project_to_rotation(const Mat3& m) {
  require_finite(m, "project_to_rotation");
  const double det = m.determinant();
  if (det < 1e-12) {
    throw std::invalid_argument(
        "project_to_rotation: determinant must be positive (singular or reflection input)");
  }
  // Newton iteration for the polar factor: X <- (X + X^-T)/2. Quadratic
  // convergence; the limit is the nearest orthogonal matrix and keeps the
  // sign of det, which is positive here.
  Mat3 x = m;
  for (int it = 0; it < 40; ++it) {
    const Mat3 next = 0.5 * (x + x.transpose().inverse());
    const double delta = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (delta < 1e-15) break;
  }
  if (!RotationMatrix::is_valid(x, 1e-10)) {
    throw std::invalid_argument("project_to_rotation: iteration failed to produce a rotation");
  }
  return RotationMatrix(x, RotationMatrix::Unchecked{});
}

}  // namespace bearpose
