#pragma once

#include <vector>

#include "bearpose/geom3.hpp"
#include "bearpose/network.hpp"
#include "bearpose/world.hpp"

namespace bearpose {

/// What a follower receives from neighbor j: j's current estimates and j's
/// body-frame bearing toward the receiver.
struct NeighborPacket {
  AgentId sender = 0;
  RotationMatrix attitude_estimate;   // Rhat_j
  Vec3 position_estimate = Vec3::Zero();  // phat_j
  Vec3 bearing_to_receiver = Vec3::Zero();  // b_ji in j's body frame
};

struct Gains {
  double k_r = 1.0;
  double k_p = 1.0;
};

/// Per-agent estimates; leader entries always mirror the true pose.
struct ObserverState {
  std::vector<RotationMatrix> attitude;  // 1-based
  std::vector<Vec3> position;            // 1-based

  int agent_count() const { return static_cast<int>(attitude.size()) - 1; }
};

/// Everything follower i senses in one step: its angular velocity and its
/// body-frame bearings toward each neighbor, plus the neighbor packets.
/// All update laws below consume only these and the follower's own estimate.
struct FollowerInputs {
  Vec3 omega = Vec3::Zero();
  std::vector<BearingMeasurement> own_bearings;  // b_ij in i's body frame, one per neighbor
  std::vector<NeighborPacket> packets;            // one per neighbor
};

struct FollowerRates {
  Vec3 correction = Vec3::Zero();           // c_i, inertial frame
  Vec3 attitude_body_rate = Vec3::Zero();   // u_i with Rhat' = Rhat [u_i]^x
  Vec3 position_rate = Vec3::Zero();        // phat'
};

/// c_i = sum_j k_ij (Rhat_j b_ij^j x Rhat_i b_ij^i). The sender-side bearing
/// b_ij^j is recovered from the packet as -b_ji^j. Packets and bearings must
/// cover the neighbor set exactly.
Vec3 correction_vector(AgentId i, const ObserverState& state,
                       const std::vector<NeighborPacket>& packets,
                       const std::vector<BearingMeasurement>& own_bearings,
                       const Topology& topology);

/// Body-frame attitude update u_i = omega_i - k_R Rhat_i^T c_i, so the
/// continuous law is Rhat' = Rhat [u_i]^x.
Vec3 attitude_rate(AgentId i, const ObserverState& state,
                   const std::vector<NeighborPacket>& packets,
                   const std::vector<BearingMeasurement>& own_bearings, const Vec3& omega,
                   const Gains& gains, const Topology& topology);

/// phat' = -k_R [c_i]^x phat_i - k_p sum_j Rhat_i P_{b_ij^i} Rhat_i^T (phat_i - phat_j).
Vec3 position_rate(AgentId i, const ObserverState& state,
                   const std::vector<NeighborPacket>& packets,
                   const std::vector<BearingMeasurement>& own_bearings, const Gains& gains,
                   const Topology& topology);

/// All three rates with the correction computed once.
FollowerRates follower_rates(AgentId i, const ObserverState& state, const FollowerInputs& inputs,
                             const Gains& gains, const Topology& topology);

/// Coupling term of the position error dynamics:
/// f_j = ((Rt_j - I) - (Rt_i - I)) Rt_j^T (p_j - pt_j) + pt_j.
/// Vanishes for pt_j = 0 and Rt_j = Rt_i = I.
Vec3 f_term(const Vec3& p_tilde_j, const RotationMatrix& r_tilde_j,
            const RotationMatrix& r_tilde_i, const Vec3& p_j);

}  // namespace bearpose
