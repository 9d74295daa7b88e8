#pragma once

#include <cstdint>
#include <random>

#include "bearpose/geom3.hpp"

namespace bearpose {

/// Deterministic random helpers. Doubles are derived from raw engine output
/// instead of std distributions so that streams are reproducible across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return engine_(); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  Vec3 in_box(double half_extent) {
    return Vec3(uniform(-half_extent, half_extent), uniform(-half_extent, half_extent),
                uniform(-half_extent, half_extent));
  }

  Vec3 unit_vector();

  /// Uniform (Haar) rotation via a uniformly distributed unit quaternion.
  RotationMatrix rotation();

 private:
  std::mt19937_64 engine_;
};

/// Stateless mix for deriving independent per-trial seeds from a base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace bearpose
