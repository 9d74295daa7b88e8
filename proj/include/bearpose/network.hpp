#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "bearpose/geom3.hpp"

namespace bearpose {

/// Agents are numbered 1..n; 1 and 2 are always the leaders.
using AgentId = int;

/// Agent positions indexed by id; element 0 is unused.
using Positions = std::vector<Vec3>;

/// Directed leader-follower interaction graph. neighbors[i] lists the agents
/// follower i receives packets from; edge_gains[i] holds the matching k_ij.
struct Topology {
  static constexpr std::array<AgentId, 2> kLeaders{1, 2};

  int agent_count = 0;
  std::vector<std::vector<AgentId>> neighbors;   // index 1..agent_count
  std::vector<std::vector<double>> edge_gains;   // parallel to neighbors

  static bool is_leader(AgentId i) { return i == 1 || i == 2; }
  int follower_count() const { return agent_count > 2 ? agent_count - 2 : 0; }
  const std::vector<AgentId>& neighbors_of(AgentId i) const { return neighbors.at(i); }
  double gain(AgentId i, AgentId j) const;
  std::vector<std::pair<AgentId, AgentId>> edges() const;
};

enum class TopologyDefect {
  none,
  cycle,
  leader_has_neighbors,
  neighbor_out_of_range,
  too_few_neighbors,
  leader_unreachable,
  collocated_agents,
  collinear_bearings,
};

const char* to_string(TopologyDefect defect);

struct ValidationResult {
  bool ok = true;
  TopologyDefect defect = TopologyDefect::none;
  std::vector<AgentId> agents;  // offenders, if any
  std::string message;
};

/// Checks, in order: acyclicity, leader neighbor-emptiness, per-follower
/// neighbor range and minimum degree, leader-to-follower reachability,
/// non-collocation over edges, and per-follower bearing non-collinearity.
/// Stops at the first violated clause.
ValidationResult validate_topology(const Topology& topology, const Positions& positions);

/// M_i = sum_j k_ij b_ij b_ij^T over the neighbors of follower i.
Mat3 bearing_matrix(AgentId i, const Topology& topology, const Positions& positions);

/// Q_i = sum_j k_ij P_{b_ij} = (sum_j k_ij) I - M_i for unit bearings.
Mat3 stiffness_matrix(AgentId i, const Topology& topology, const Positions& positions);

/// Unweighted sum_j P_{b_ij}; positive definite under non-collinearity.
Mat3 projector_sum(AgentId i, const Topology& topology, const Positions& positions);

/// Eigenvalues of a symmetric 3x3 matrix, ascending, via the closed-form
/// solution of the characteristic cubic.
std::array<double, 3> symmetric_eigenvalues(const Mat3& a);

bool distinct_eigenvalues(const std::array<double, 3>& eigenvalues, double gap = 1e-6);

struct SpectralEntry {
  AgentId agent = 0;
  std::array<double, 3> m_eigenvalues{};
  std::array<double, 3> q_eigenvalues{};
  bool distinct = false;     // consecutive M_i eigenvalue gaps all exceed `gap`
  double lambda_min_q = 0.0;
};

struct SpectralReport {
  std::vector<SpectralEntry> followers;
  const SpectralEntry& entry(AgentId i) const;
};

SpectralReport spectral_report(const Topology& topology, const Positions& positions,
                               double gap = 1e-6);

/// Distinctness of each follower's M_i spectrum under a (possibly different)
/// gap, in report order.
std::vector<bool> check_distinct_eigenvalues(const SpectralReport& report, double gap = 1e-6);

}  // namespace bearpose
