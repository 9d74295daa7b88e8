#pragma once

#include <array>
#include <vector>

#include "bearpose/geom3.hpp"
#include "bearpose/network.hpp"

namespace bearpose {

/// One additive term of an angular-velocity component:
/// constant(a), a*sin(f*t) or a*cos(f*t).
struct OmegaTerm {
  enum class Kind { constant, sine, cosine };
  Kind kind = Kind::constant;
  double amplitude = 0.0;
  double frequency = 0.0;  // rad/s, unused for constants

  double eval(double t) const;
};

/// Per-axis sum of terms; a small closed signal family that keeps scenario
/// files fully serializable.
struct OmegaSignal {
  std::array<std::vector<OmegaTerm>, 3> axis;

  Vec3 eval(double t) const;
  static OmegaSignal constant(const Vec3& w);
};

inline Vec3 eval_omega(const OmegaSignal& signal, double t) { return signal.eval(t); }

/// Ground truth: fixed positions and rotating attitudes.
struct WorldState {
  double t = 0.0;
  Positions positions;                     // 1-based, constant across steps
  std::vector<RotationMatrix> attitudes;   // 1-based

  int agent_count() const { return static_cast<int>(positions.size()) - 1; }
};

/// Unit vector from agent i toward agent j in the inertial frame.
/// Throws on (near-)collocated pairs.
Vec3 inertial_bearing(const Positions& positions, AgentId i, AgentId j);

struct BearingMeasurement {
  AgentId from = 0;
  AgentId to = 0;
  Vec3 body_bearing = Vec3::Zero();  // b_ij in agent i's body frame
};

/// b_ij expressed in agent i's body frame: R_i^T b_ij.
BearingMeasurement body_bearing(const WorldState& world, AgentId i, AgentId j);

/// Advance truth attitudes with the geometric midpoint exponential rule
/// R <- R * exp(h * omega(t + h/2)); positions are copied unchanged.
WorldState step_truth(const WorldState& world, const std::vector<OmegaSignal>& signals, double h);

}  // namespace bearpose
