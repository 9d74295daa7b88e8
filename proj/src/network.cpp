#include "bearpose/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bearpose {

namespace {

std::string agent_list(const std::vector<AgentId>& ids) {
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k > 0) out += ", ";
    out += std::to_string(ids[k]);
  }
  return out;
}

ValidationResult fail(TopologyDefect defect, std::vector<AgentId> agents, std::string detail) {
  ValidationResult r;
  r.ok = false;
  r.defect = defect;
  r.agents = std::move(agents);
  r.message = std::string(to_string(defect));
  if (!r.agents.empty()) r.message += " (agents " + agent_list(r.agents) + ")";
  if (!detail.empty()) r.message += ": " + detail;
  return r;
}

// DFS three-color cycle detection over edges i -> j for j in N_i.
bool has_cycle(const Topology& t, std::vector<AgentId>* cycle_agents) {
  enum class Color { white, gray, black };
  std::vector<Color> color(t.agent_count + 1, Color::white);
  std::vector<AgentId> stack;

  // Iterative DFS keeping an explicit path for reporting.
  for (AgentId root = 1; root <= t.agent_count; ++root) {
    if (color[root] != Color::white) continue;
    std::vector<std::pair<AgentId, std::size_t>> frames{{root, 0}};
    color[root] = Color::gray;
    stack.push_back(root);
    while (!frames.empty()) {
      auto& [node, next] = frames.back();
      const auto& adj = t.neighbors[node];
      if (next < adj.size()) {
        const AgentId to = adj[next++];
        if (to < 1 || to > t.agent_count) continue;  // range checked later
        if (color[to] == Color::gray) {
          if (cycle_agents) {
            auto it = std::find(stack.begin(), stack.end(), to);
            cycle_agents->assign(it, stack.end());
          }
          return true;
        }
        if (color[to] == Color::white) {
          color[to] = Color::gray;
          stack.push_back(to);
          frames.emplace_back(to, 0);
        }
      } else {
        color[node] = Color::black;
        stack.pop_back();
        frames.pop_back();
      }
    }
  }
  return false;
}

}  // namespace

const char* to_string(TopologyDefect defect) {
  switch (defect) {
    case TopologyDefect::none: return "ok";
    case TopologyDefect::cycle: return "graph contains a directed cycle";
    case TopologyDefect::leader_has_neighbors: return "leader has neighbors";
    case TopologyDefect::neighbor_out_of_range:
      return "follower neighbor set not contained in lower-numbered agents";
    case TopologyDefect::too_few_neighbors: return "follower has fewer than two neighbors";
    case TopologyDefect::leader_unreachable: return "leader has no directed path to a follower";
    case TopologyDefect::collocated_agents: return "collocated agents on an edge";
    case TopologyDefect::collinear_bearings: return "follower bearings are all collinear";
  }
  return "unknown";
}

double Topology::gain(AgentId i, AgentId j) const {
  const auto& adj = neighbors.at(i);
  for (std::size_t k = 0; k < adj.size(); ++k) {
    if (adj[k] == j) return edge_gains.at(i)[k];
  }
  throw std::out_of_range("Topology::gain: no edge (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
}

std::vector<std::pair<AgentId, AgentId>> Topology::edges() const {
  std::vector<std::pair<AgentId, AgentId>> out;
  for (AgentId i = 1; i <= agent_count; ++i) {
    for (AgentId j : neighbors[i]) out.emplace_back(i, j);
  }
  return out;
}

ValidationResult validate_topology(const Topology& t, const Positions& positions) {
  if (t.agent_count < 3) {
    return fail(TopologyDefect::too_few_neighbors, {},
                "network needs at least one follower (3 agents)");
  }
  if (static_cast<int>(t.neighbors.size()) != t.agent_count + 1 ||
      static_cast<int>(positions.size()) != t.agent_count + 1) {
    throw std::invalid_argument("validate_topology: containers not sized to agent_count + 1");
  }

  std::vector<AgentId> offenders;
  if (has_cycle(t, &offenders)) {
    return fail(TopologyDefect::cycle, offenders, "");
  }

  for (AgentId l : Topology::kLeaders) {
    if (!t.neighbors[l].empty()) {
      return fail(TopologyDefect::leader_has_neighbors, {l}, "");
    }
  }

  for (AgentId i = 3; i <= t.agent_count; ++i) {
    for (AgentId j : t.neighbors[i]) {
      if (j < 1 || j >= i) {
        return fail(TopologyDefect::neighbor_out_of_range, {i, j}, "");
      }
    }
    if (t.neighbors[i].size() < 2) {
      return fail(TopologyDefect::too_few_neighbors, {i}, "");
    }
  }

  // Reachability: leader l reaches follower f if f's neighbor relation,
  // traversed in reverse (j -> i for j in N_i), connects l to f.
  for (AgentId l : Topology::kLeaders) {
    std::vector<char> reached(t.agent_count + 1, 0);
    reached[l] = 1;
    std::vector<AgentId> queue{l};
    while (!queue.empty()) {
      const AgentId j = queue.back();
      queue.pop_back();
      for (AgentId i = 3; i <= t.agent_count; ++i) {
        if (reached[i]) continue;
        const auto& adj = t.neighbors[i];
        if (std::find(adj.begin(), adj.end(), j) != adj.end()) {
          reached[i] = 1;
          queue.push_back(i);
        }
      }
    }
    for (AgentId f = 3; f <= t.agent_count; ++f) {
      if (!reached[f]) return fail(TopologyDefect::leader_unreachable, {l, f}, "");
    }
  }

  for (const auto& [i, j] : t.edges()) {
    if ((positions[i] - positions[j]).norm() <= 1e-9) {
      return fail(TopologyDefect::collocated_agents, {i, j}, "");
    }
  }

  for (AgentId i = 3; i <= t.agent_count; ++i) {
    const auto& adj = t.neighbors[i];
    bool found = false;
    for (std::size_t a = 0; a < adj.size() && !found; ++a) {
      const Vec3 ba = (positions[adj[a]] - positions[i]).normalized();
      for (std::size_t b = a + 1; b < adj.size() && !found; ++b) {
        const Vec3 bb = (positions[adj[b]] - positions[i]).normalized();
        if (ba.cross(bb).norm() > 1e-9) found = true;
      }
    }
    if (!found) return fail(TopologyDefect::collinear_bearings, {i}, "");
  }

  return ValidationResult{};
}

Mat3 bearing_matrix(AgentId i, const Topology& t, const Positions& positions) {
  Mat3 m = Mat3::Zero();
  const auto& adj = t.neighbors.at(i);
  for (std::size_t k = 0; k < adj.size(); ++k) {
    const Vec3 b = (positions.at(adj[k]) - positions.at(i)).normalized();
    m += t.edge_gains.at(i)[k] * (b * b.transpose());
  }
  return m;
}

Mat3 stiffness_matrix(AgentId i, const Topology& t, const Positions& positions) {
  Mat3 q = Mat3::Zero();
  const auto& adj = t.neighbors.at(i);
  for (std::size_t k = 0; k < adj.size(); ++k) {
    const Vec3 b = (positions.at(adj[k]) - positions.at(i)).normalized();
    q += t.edge_gains.at(i)[k] * orthogonal_projector(b);
  }
  return q;
}

Mat3 projector_sum(AgentId i, const Topology& t, const Positions& positions) {
  Mat3 p = Mat3::Zero();
  for (AgentId j : t.neighbors.at(i)) {
    p += orthogonal_projector(positions.at(j) - positions.at(i));
  }
  return p;
}

std::array<double, 3> symmetric_eigenvalues(const Mat3& a) {
  if (!a.allFinite()) {
    throw std::invalid_argument("symmetric_eigenvalues: non-finite input");
  }
  const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  std::array<double, 3> ev;
  if (off < 1e-300) {
    ev = {a(0, 0), a(1, 1), a(2, 2)};
    std::sort(ev.begin(), ev.end());
    return ev;
  }
  const double q = a.trace() / 3.0;
  const Mat3 centered = a - q * Mat3::Identity();
  const double p2 = centered.diagonal().squaredNorm() + 2.0 * off;
  const double p = std::sqrt(p2 / 6.0);
  const Mat3 b = centered / p;
  double r = 0.5 * b.determinant();
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double two_pi_3 = 2.0 * std::numbers::pi / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + two_pi_3);
  const double e2 = 3.0 * q - e1 - e3;
  ev = {e3, e2, e1};
  std::sort(ev.begin(), ev.end());
  return ev;
}

bool distinct_eigenvalues(const std::array<double, 3>& eigenvalues, double gap) {
  return (eigenvalues[1] - eigenvalues[0]) > gap && (eigenvalues[2] - eigenvalues[1]) > gap;
}

const SpectralEntry& SpectralReport::entry(AgentId i) const {
  for (const auto& e : followers) {
    if (e.agent == i) return e;
  }
  throw std::out_of_range("SpectralReport::entry: no follower " + std::to_string(i));
}

std::vector<bool> check_distinct_eigenvalues(const SpectralReport& report, double gap) {
  std::vector<bool> out;
  for (const SpectralEntry& e : report.followers) {
    out.push_back(distinct_eigenvalues(e.m_eigenvalues, gap));
  }
  return out;
}

SpectralReport spectral_report(const Topology& t, const Positions& positions, double gap) {
  SpectralReport report;
  for (AgentId i = 3; i <= t.agent_count; ++i) {
    SpectralEntry e;
    e.agent = i;
    e.m_eigenvalues = symmetric_eigenvalues(bearing_matrix(i, t, positions));
    e.q_eigenvalues = symmetric_eigenvalues(stiffness_matrix(i, t, positions));
    e.distinct = distinct_eigenvalues(e.m_eigenvalues, gap);
    e.lambda_min_q = e.q_eigenvalues[0];
    report.followers.push_back(e);
  }
  return report;
}

}  // namespace bearpose
