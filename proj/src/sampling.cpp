#include "bearpose/sampling.hpp"

#include <cmath>
#include <numbers>

namespace bearpose {

Vec3 Rng::unit_vector() {
  // Uniform on the sphere: z uniform in [-1, 1], azimuth uniform.
  const double z = uniform(-1.0, 1.0);
  const double phi = uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vec3(r * std::cos(phi), r * std::sin(phi), z);
}

RotationMatrix Rng::rotation() {
  // Shoemake's subgroup method: three uniforms to a uniform unit quaternion.
  const double u1 = uniform();
  const double u2 = uniform(0.0, 2.0 * std::numbers::pi);
  const double u3 = uniform(0.0, 2.0 * std::numbers::pi);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double qw = a * std::sin(u2);
  const double qx = a * std::cos(u2);
  const double qy = b * std::sin(u3);
  const double qz = b * std::cos(u3);

  Mat3 m;
  m << 1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw),
      2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw),
      2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy);
  return project_to_rotation(m);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace bearpose
