#include "bearpose/observers.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bearpose {

namespace {

// Packets and bearings must line up one-to-one with N_i (any order).
void check_coverage(AgentId i, const std::vector<NeighborPacket>& packets,
                    const std::vector<BearingMeasurement>& own_bearings,
                    const Topology& topology) {
  const auto& adj = topology.neighbors_of(i);
  auto missing = [&](AgentId j) {
    const bool in_packets =
        std::any_of(packets.begin(), packets.end(),
                    [j](const NeighborPacket& p) { return p.sender == j; });
    const bool in_bearings =
        std::any_of(own_bearings.begin(), own_bearings.end(),
                    [&](const BearingMeasurement& b) { return b.to == j; });
    return !in_packets || !in_bearings;
  };
  if (packets.size() != adj.size() || own_bearings.size() != adj.size() ||
      std::any_of(adj.begin(), adj.end(), missing)) {
    throw std::invalid_argument("follower " + std::to_string(i) +
                                ": packets/bearings do not cover the neighbor set exactly");
  }
  for (const BearingMeasurement& b : own_bearings) {
    if (b.from != i) {
      throw std::invalid_argument("follower " + std::to_string(i) +
                                  ": bearing measured by a different agent");
    }
  }
}

const NeighborPacket& packet_from(const std::vector<NeighborPacket>& packets, AgentId j) {
  for (const NeighborPacket& p : packets) {
    if (p.sender == j) return p;
  }
  throw std::invalid_argument("missing packet from agent " + std::to_string(j));
}

const Vec3& bearing_toward(const std::vector<BearingMeasurement>& bearings, AgentId j) {
  for (const BearingMeasurement& b : bearings) {
    if (b.to == j) return b.body_bearing;
  }
  throw std::invalid_argument("missing bearing toward agent " + std::to_string(j));
}

Vec3 correction_unchecked(AgentId i, const ObserverState& state,
                          const std::vector<NeighborPacket>& packets,
                          const std::vector<BearingMeasurement>& own_bearings,
                          const Topology& topology) {
  const RotationMatrix& rhat_i = state.attitude.at(i);
  const auto& adj = topology.neighbors_of(i);
  Vec3 c = Vec3::Zero();
  for (std::size_t k = 0; k < adj.size(); ++k) {
    const AgentId j = adj[k];
    const NeighborPacket& pkt = packet_from(packets, j);
    const Vec3 b_ij_j = -pkt.bearing_to_receiver;  // b_ij = -b_ji, in j's frame
    const Vec3 lhs = pkt.attitude_estimate * b_ij_j;
    const Vec3 rhs = rhat_i * bearing_toward(own_bearings, j);
    c += topology.edge_gains.at(i)[k] * lhs.cross(rhs);
  }
  return c;
}

}  // namespace

Vec3 correction_vector(AgentId i, const ObserverState& state,
                       const std::vector<NeighborPacket>& packets,
                       const std::vector<BearingMeasurement>& own_bearings,
                       const Topology& topology) {
  check_coverage(i, packets, own_bearings, topology);
  return correction_unchecked(i, state, packets, own_bearings, topology);
}

Vec3 attitude_rate(AgentId i, const ObserverState& state,
                   const std::vector<NeighborPacket>& packets,
                   const std::vector<BearingMeasurement>& own_bearings, const Vec3& omega,
                   const Gains& gains, const Topology& topology) {
  const Vec3 c = correction_vector(i, state, packets, own_bearings, topology);
  return omega - gains.k_r * state.attitude.at(i).rotate_back(c);
}

Vec3 position_rate(AgentId i, const ObserverState& state,
                   const std::vector<NeighborPacket>& packets,
                   const std::vector<BearingMeasurement>& own_bearings, const Gains& gains,
                   const Topology& topology) {
  FollowerInputs inputs;
  inputs.own_bearings = own_bearings;
  inputs.packets = packets;
  return follower_rates(i, state, inputs, gains, topology).position_rate;
}

FollowerRates follower_rates(AgentId i, const ObserverState& state, const FollowerInputs& inputs,
                             const Gains& gains, const Topology& topology) {
  check_coverage(i, inputs.packets, inputs.own_bearings, topology);
  FollowerRates rates;
  rates.correction = correction_unchecked(i, state, inputs.packets, inputs.own_bearings, topology);

  const RotationMatrix& rhat_i = state.attitude.at(i);
  rates.attitude_body_rate = inputs.omega - gains.k_r * rhat_i.rotate_back(rates.correction);

  const Vec3& phat_i = state.position.at(i);
  Vec3 pdot = -gains.k_r * rates.correction.cross(phat_i);
  for (const NeighborPacket& pkt : inputs.packets) {
    const Vec3& b_body = bearing_toward(inputs.own_bearings, pkt.sender);
    // Rhat_i P_{b^i} Rhat_i^T (phat_i - phat_j), with P applied in the body frame.
    const Vec3 d_body = rhat_i.rotate_back(phat_i - pkt.position_estimate);
    const Vec3 projected = d_body - b_body * (b_body.dot(d_body) / b_body.squaredNorm());
    pdot -= gains.k_p * (rhat_i * projected);
  }
  rates.position_rate = pdot;
  return rates;
}

Vec3 f_term(const Vec3& p_tilde_j, const RotationMatrix& r_tilde_j,
            const RotationMatrix& r_tilde_i, const Vec3& p_j) {
  const Vec3 recovered = r_tilde_j.rotate_back(p_j - p_tilde_j);  // phat_j
  return (r_tilde_j.matrix() - r_tilde_i.matrix()) * recovered + p_tilde_j;
}

}  // namespace bearpose
