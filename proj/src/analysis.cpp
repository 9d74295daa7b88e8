#include "bearpose/analysis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace bearpose {

namespace {

constexpr double kEquilibriumResidualTol = 1e-8;

// Body-frame rate of the unforced attitude error flow.
Vec3 unforced_rate(const Mat3& m, const RotationMatrix& r_tilde, double k_r) {
  return -2.0 * k_r * psi(m * r_tilde.matrix());
}

}  // namespace

EquilibriumSet enumerate_equilibria(AgentId agent, const Mat3& m_matrix, double eigenvalue_gap) {
  if ((m_matrix - m_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("enumerate_equilibria: matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> solver(m_matrix);
  const Vec3 ev = solver.eigenvalues();
  if (ev[0] < -1e-9) {
    throw std::invalid_argument("enumerate_equilibria: matrix must be positive semi-definite");
  }
  if (ev[1] - ev[0] <= eigenvalue_gap || ev[2] - ev[1] <= eigenvalue_gap) {
    throw std::invalid_argument(
        "enumerate_equilibria: repeated eigenvalues, equilibria are not isolated");
  }

  EquilibriumSet set;
  set.agent = agent;
  set.points.push_back(RotationMatrix::identity());
  for (int k = 0; k < 3; ++k) {
    const Vec3 axis = solver.eigenvectors().col(k).normalized();
    set.points.push_back(angle_axis(std::numbers::pi, axis));
  }
  for (const RotationMatrix& point : set.points) {
    set.residuals.push_back(psi(m_matrix * point.matrix()).norm());
  }
  return set;
}

Mat3 unforced_jacobian(const Mat3& m_matrix, const RotationMatrix& at, double k_r) {
  if (psi(m_matrix * at.matrix()).norm() > kEquilibriumResidualTol) {
    throw std::invalid_argument("unforced_jacobian: base point is not an equilibrium");
  }
  const double delta = 1e-6;
  Mat3 jacobian;
  for (int k = 0; k < 3; ++k) {
    Vec3 eta = Vec3::Zero();
    eta[k] = delta;
    const Vec3 plus = unforced_rate(m_matrix, at * exp_so3(eta), k_r);
    const Vec3 minus = unforced_rate(m_matrix, at * exp_so3(-eta), k_r);
    jacobian.col(k) = (plus - minus) / (2.0 * delta);
  }
  return jacobian;
}

std::array<double, 3> linearize_unforced(const Mat3& m_matrix, const RotationMatrix& at,
                                         double k_r) {
  const Mat3 jacobian = unforced_jacobian(m_matrix, at, k_r);
  Eigen::EigenSolver<Mat3> solver(jacobian);
  std::array<double, 3> real_parts{solver.eigenvalues()[0].real(),
                                   solver.eigenvalues()[1].real(),
                                   solver.eigenvalues()[2].real()};
  std::sort(real_parts.begin(), real_parts.end());
  return real_parts;
}

Vec3 dominant_direction(const Mat3& jacobian) {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(0.5 * (jacobian + jacobian.transpose()));
  return solver.eigenvectors().col(2).normalized();
}

TimeSeries simulate_error_dynamics(const ScenarioConfig& cfg, double horizon, double h) {
  return simulate_error_dynamics(cfg, horizon, h, cfg.sample_stride, nullptr);
}

TimeSeries simulate_error_dynamics(const ScenarioConfig& cfg, double horizon, double h,
                                   int sample_stride, std::vector<ErrorSample>* state_log) {
  const ValidationResult check = validate_topology(cfg.topology, cfg.positions);
  if (!check.ok) throw ScenarioError("topology: " + check.message);
  if (!(h > 0.0) || !(horizon > 0.0) || sample_stride < 1) {
    throw std::invalid_argument("simulate_error_dynamics: bad step, horizon or stride");
  }

  const int n = cfg.agent_count;
  const int followers = n - 2;

  // Constant data per follower: inertial bearings, their projectors and M_i.
  std::vector<std::vector<Vec3>> bearing(n + 1);
  std::vector<std::vector<Mat3>> projector(n + 1);
  std::vector<Mat3> m_matrix(n + 1, Mat3::Zero());
  for (AgentId i = 3; i <= n; ++i) {
    for (AgentId j : cfg.topology.neighbors[i]) {
      const Vec3 b = inertial_bearing(cfg.positions, i, j);
      bearing[i].push_back(b);
      projector[i].push_back(orthogonal_projector(b));
    }
    m_matrix[i] = bearing_matrix(i, cfg.topology, cfg.positions);
  }

  // Error state, follower-ordered (agent i lives at index i-3). Truth starts
  // at the identity, so Rtilde(0) is the transposed initial attitude estimate.
  std::vector<RotationMatrix> r_tilde(followers), r_mid(followers), r_next(followers);
  std::vector<Vec3> p_tilde(followers), p_mid(followers), p_next(followers);
  for (AgentId i = 3; i <= n; ++i) {
    const InitialEstimate& e = cfg.initial_estimates[i];
    const RotationMatrix rhat0 = angle_axis(e.attitude_angle, e.attitude_axis);
    r_tilde[i - 3] = rhat0.transposed();
    p_tilde[i - 3] = cfg.positions[i] - r_tilde[i - 3] * e.position;
  }

  auto rates = [&](const std::vector<RotationMatrix>& rt, const std::vector<Vec3>& pt,
                   std::vector<Vec3>& att_rate, std::vector<Vec3>& pos_rate) {
    for (AgentId i = 3; i <= n; ++i) {
      const int fi = i - 3;
      const auto& adj = cfg.topology.neighbors[i];
      const auto& k_ij = cfg.topology.edge_gains[i];
      const Mat3& rt_i = rt[fi].matrix();

      Vec3 c = -2.0 * psi(m_matrix[i] * rt_i);
      Vec3 pdot = Vec3::Zero();
      for (std::size_t k = 0; k < adj.size(); ++k) {
        const AgentId j = adj[k];
        const Vec3& b = bearing[i][k];
        if (!Topology::is_leader(j)) {
          const Mat3& rt_j = rt[j - 3].matrix();
          c += k_ij[k] * Vec3((rt_j.transpose() - Mat3::Identity()) * b)
                   .cross(Vec3(rt_i.transpose() * b));
          pdot += projector[i][k] *
                  (f_term(pt[j - 3], rt[j - 3], rt[fi], cfg.positions[j]) - pt[fi]);
        } else {
          pdot += projector[i][k] *
                  (f_term(Vec3::Zero(), RotationMatrix::identity(), rt[fi], cfg.positions[j]) -
                   pt[fi]);
        }
      }
      att_rate[fi] = cfg.gains.k_r * c;
      pos_rate[fi] = cfg.gains.k_p * pdot;
    }
  };

  std::vector<Vec3> k1_att(followers), k1_pos(followers), k2_att(followers), k2_pos(followers);

  TimeSeries series;
  for (AgentId i = 3; i <= n; ++i) series.followers.push_back(i);
  series.rot_err.resize(followers);
  series.pos_err.resize(followers);
  series.pos_est_err.resize(followers);

  auto emit = [&](double t) {
    series.t.push_back(t);
    double rot_sum = 0.0, pos_sum = 0.0, pos_est_sum = 0.0;
    ErrorSample sample;
    sample.t = t;
    for (int fi = 0; fi < followers; ++fi) {
      const double rerr = rotation_distance(r_tilde[fi]);
      const double perr = p_tilde[fi].norm();
      // phat = Rtilde^T (p - ptilde); the physical estimate error follows.
      const Vec3 phat = r_tilde[fi].rotate_back(cfg.positions[fi + 3] - p_tilde[fi]);
      const double phat_err = (cfg.positions[fi + 3] - phat).norm();
      series.rot_err[fi].push_back(rerr);
      series.pos_err[fi].push_back(perr);
      series.pos_est_err[fi].push_back(phat_err);
      rot_sum += rerr;
      pos_sum += perr;
      pos_est_sum += phat_err;
      if (state_log != nullptr) {
        sample.r_tilde.push_back(r_tilde[fi]);
        sample.p_tilde.push_back(p_tilde[fi]);
      }
    }
    series.rot_err_avg.push_back(rot_sum / followers);
    series.pos_err_avg.push_back(pos_sum / followers);
    series.pos_est_err_avg.push_back(pos_est_sum / followers);
    if (state_log != nullptr) state_log->push_back(std::move(sample));
  };

  const long long n_steps = std::llround(horizon / h);
  for (long long k = 0;; ++k) {
    if (k % sample_stride == 0 || k == n_steps) emit(static_cast<double>(k) * h);
    if (k == n_steps) break;

    rates(r_tilde, p_tilde, k1_att, k1_pos);
    for (int fi = 0; fi < followers; ++fi) {
      r_mid[fi] = r_tilde[fi] * exp_so3(0.5 * h * k1_att[fi]);
      p_mid[fi] = p_tilde[fi] + 0.5 * h * k1_pos[fi];
    }
    rates(r_mid, p_mid, k2_att, k2_pos);
    for (int fi = 0; fi < followers; ++fi) {
      r_next[fi] = r_tilde[fi] * exp_so3(h * k2_att[fi]);
      p_next[fi] = p_tilde[fi] + h * k2_pos[fi];
    }
    std::swap(r_tilde, r_next);
    std::swap(p_tilde, p_next);
  }
  return series;
}

std::optional<double> unstable_escape_time(const Mat3& m_matrix,
                                           const RotationMatrix& equilibrium,
                                           const Vec3& direction, double epsilon, double k_r,
                                           double h, double t_max, double ball_radius) {
  RotationMatrix r = equilibrium * exp_so3(epsilon * direction.normalized());
  const long long n_steps = std::llround(t_max / h);
  for (long long k = 0; k <= n_steps; ++k) {
    if (rotation_distance(r * equilibrium.transposed()) > ball_radius) {
      return static_cast<double>(k) * h;
    }
    const Vec3 k1 = unforced_rate(m_matrix, r, k_r);
    const Vec3 k2 = unforced_rate(m_matrix, r * exp_so3(0.5 * h * k1), k_r);
    r = r * exp_so3(h * k2);
  }
  return std::nullopt;
}

DecayEnvelope iss_inequality_check(const TimeSeries& series, AgentId follower,
                                   const Topology& topology, const SpectralReport& spectra,
                                   double k_r, double slack) {
  const int col = series.column_of(follower);
  const double lam_q = spectra.entry(follower).lambda_min_q;
  const auto& adj = topology.neighbors_of(follower);
  const auto& gains = topology.edge_gains.at(follower);

  DecayEnvelope env;
  env.t = series.t;
  env.measured.resize(series.sample_count());
  env.bound.assign(series.sample_count(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < series.sample_count(); ++k) {
    const double r = series.rot_err[col][k];
    env.measured[k] = r * r;
  }
  for (std::size_t k = 1; k + 1 < series.sample_count(); ++k) {
    const double lhs =
        (env.measured[k + 1] - env.measured[k - 1]) / (series.t[k + 1] - series.t[k - 1]);
    double coupling = 0.0;
    for (std::size_t e = 0; e < adj.size(); ++e) {
      const AgentId j = adj[e];
      const double neighbor_err =
          Topology::is_leader(j) ? 0.0 : series.rot_err[series.column_of(j)][k];
      coupling += gains[e] * neighbor_err;
    }
    const double rhs = -4.0 * k_r * lam_q * env.measured[k] + 4.0 * k_r * lam_q +
                       std::numbers::sqrt2 * k_r * coupling;
    env.bound[k] = rhs + slack;
    if (lhs > rhs + slack) ++env.violations;
  }

  // Fitted decay rate of |Rtilde|_I over the decaying stretch.
  double sum_t = 0, sum_y = 0, sum_tt = 0, sum_ty = 0;
  int count = 0;
  for (std::size_t k = 0; k < series.sample_count(); ++k) {
    const double r = series.rot_err[col][k];
    if (r > 1e-12) {
      const double y = std::log(r);
      sum_t += series.t[k];
      sum_y += y;
      sum_tt += series.t[k] * series.t[k];
      sum_ty += series.t[k] * y;
      ++count;
    }
  }
  if (count > 1) {
    const double denom = count * sum_tt - sum_t * sum_t;
    if (std::abs(denom) > 0.0) env.fitted_rate = -(count * sum_ty - sum_t * sum_y) / denom;
  }
  return env;
}

DecayEnvelope ges_envelope_check(const TimeSeries& series, AgentId follower,
                                 double lambda_min_p, double k_p, double slack, double floor) {
  const int col = series.column_of(follower);
  DecayEnvelope env;
  env.t = series.t;
  env.measured = series.pos_err[col];
  env.bound.resize(series.sample_count());
  const double initial = env.measured.empty() ? 0.0 : env.measured.front();
  for (std::size_t k = 0; k < series.sample_count(); ++k) {
    env.bound[k] =
        (1.0 + slack) * initial * std::exp(-k_p * lambda_min_p * series.t[k]) + floor;
    if (env.measured[k] > env.bound[k]) ++env.violations;
  }
  double sum_t = 0, sum_y = 0, sum_tt = 0, sum_ty = 0;
  int count = 0;
  for (std::size_t k = 0; k < series.sample_count(); ++k) {
    if (env.measured[k] > 1e-12) {
      const double y = std::log(env.measured[k]);
      sum_t += series.t[k];
      sum_y += y;
      sum_tt += series.t[k] * series.t[k];
      sum_ty += series.t[k] * y;
      ++count;
    }
  }
  if (count > 1) {
    const double denom = count * sum_tt - sum_t * sum_t;
    if (std::abs(denom) > 0.0) env.fitted_rate = -(count * sum_ty - sum_t * sum_y) / denom;
  }
  return env;
}

}  // namespace bearpose
