#pragma once

#include <optional>
#include <vector>

#include "bearpose/network.hpp"
#include "bearpose/scenario.hpp"
#include "bearpose/sim.hpp"

namespace bearpose {

/// Equilibria of the unforced attitude error flow of one follower: identity
/// plus the three pi-rotations about the unit eigenvectors of M_i. Only
/// defined when M_i has three distinct eigenvalues (isolation).
struct EquilibriumSet {
  AgentId agent = 0;
  std::vector<RotationMatrix> points;  // points[0] is the identity
  std::vector<double> residuals;       // ||psi(M * point)|| per point
};

EquilibriumSet enumerate_equilibria(AgentId agent, const Mat3& m_matrix,
                                    double eigenvalue_gap = 1e-6);

/// Jacobian of the unforced error field in exponential coordinates around a
/// base rotation (central finite differences, step 1e-6). The base point must
/// zero the field.
Mat3 unforced_jacobian(const Mat3& m_matrix, const RotationMatrix& at, double k_r);

/// Real parts of the Jacobian eigenvalues, ascending.
std::array<double, 3> linearize_unforced(const Mat3& m_matrix, const RotationMatrix& at,
                                         double k_r);

/// Eigenvector of the symmetrized Jacobian with the largest eigenvalue.
Vec3 dominant_direction(const Mat3& jacobian);

/// Integrates the closed-form error dynamics (attitude error flow driven by
/// psi(M_i Rtilde_i) plus neighbor coupling, position error flow driven by
/// the bearing projectors) directly in error coordinates. Independent of the
/// measurement-driven observer path; used as its cross-check oracle.
TimeSeries simulate_error_dynamics(const ScenarioConfig& config, double horizon, double h);
TimeSeries simulate_error_dynamics(const ScenarioConfig& config, double horizon, double h,
                                   int sample_stride, std::vector<ErrorSample>* state_log);

/// Integrates the unforced single-agent attitude error flow from a point
/// displaced by `epsilon` along `direction` off the equilibrium, and returns
/// the first time the distance to the equilibrium exceeds `ball_radius`
/// (escape), or nullopt if it stays inside until t_max.
std::optional<double> unstable_escape_time(const Mat3& m_matrix,
                                           const RotationMatrix& equilibrium,
                                           const Vec3& direction, double epsilon, double k_r,
                                           double h, double t_max, double ball_radius = 0.1);

struct DecayEnvelope {
  std::vector<double> t;
  std::vector<double> measured;
  std::vector<double> bound;
  double fitted_rate = 0.0;  // exponential decay rate fitted to `measured`
  int violations = 0;        // samples where measured exceeds bound
};

/// Checks the attitude ISS differential inequality along a run: the central
/// finite-difference derivative of |Rtilde_i|_I^2 must stay below
/// -4 k_R lam_Q |Rtilde_i|_I^2 + 4 k_R lam_Q + sqrt(2) k_R sum_j k_ij |Rtilde_j|_I
/// plus `slack` at every interior sample.
DecayEnvelope iss_inequality_check(const TimeSeries& series, AgentId follower,
                                   const Topology& topology, const SpectralReport& spectra,
                                   double k_r, double slack = 1e-3);

/// Checks the exponential envelope of the unforced position error:
/// ||ptilde(t)|| <= (1 + slack) ||ptilde(0)|| exp(-k_p lambda_min_p t) + floor.
/// The additive floor accounts for reconstructing ptilde from finite-precision
/// rotations, which leaves round-off noise near 1e-13 on long runs.
DecayEnvelope ges_envelope_check(const TimeSeries& series, AgentId follower,
                                 double lambda_min_p, double k_p, double slack = 0.05,
                                 double floor = 1e-12);

}  // namespace bearpose
