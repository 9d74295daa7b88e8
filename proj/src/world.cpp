#include "bearpose/world.hpp"

#include <cmath>
#include <stdexcept>

namespace bearpose {

double OmegaTerm::eval(double t) const {
  switch (kind) {
    case Kind::constant: return amplitude;
    case Kind::sine: return amplitude * std::sin(frequency * t);
    case Kind::cosine: return amplitude * std::cos(frequency * t);
  }
  return 0.0;
}

Vec3 OmegaSignal::eval(double t) const {
  Vec3 w = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    for (const OmegaTerm& term : axis[k]) w[k] += term.eval(t);
  }
  return w;
}

OmegaSignal OmegaSignal::constant(const Vec3& w) {
  OmegaSignal s;
  for (int k = 0; k < 3; ++k) {
    if (w[k] != 0.0) s.axis[k].push_back({OmegaTerm::Kind::constant, w[k], 0.0});
  }
  return s;
}

Vec3 inertial_bearing(const Positions& positions, AgentId i, AgentId j) {
  if (i == j) throw std::invalid_argument("inertial_bearing: i == j");
  const Vec3 d = positions.at(j) - positions.at(i);
  const double n = d.norm();
  if (n <= 1e-9) {
    throw std::invalid_argument("inertial_bearing: agents " + std::to_string(i) + " and " +
                                std::to_string(j) + " are collocated");
  }
  return d / n;
}

BearingMeasurement body_bearing(const WorldState& world, AgentId i, AgentId j) {
  const Vec3 b = inertial_bearing(world.positions, i, j);
  return BearingMeasurement{i, j, world.attitudes.at(i).rotate_back(b)};
}

WorldState step_truth(const WorldState& world, const std::vector<OmegaSignal>& signals, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step_truth: h must be positive");
  WorldState next = world;
  next.t = world.t + h;
  const double t_mid = world.t + 0.5 * h;
  for (AgentId i = 1; i <= world.agent_count(); ++i) {
    const Vec3 w = signals.at(i).eval(t_mid);
    next.attitudes[i] = world.attitudes[i] * exp_so3(h * w);
  }
  return next;
}

}  // namespace bearpose
