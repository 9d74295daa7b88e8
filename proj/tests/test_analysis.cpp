#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bearpose/analysis.hpp"
#include "bearpose/sampling.hpp"
#include "support/test_scenarios.hpp"

using namespace bearpose;

namespace {

constexpr double kPi = std::numbers::pi;

// Small-angle expansion of the unforced field around an equilibrium A with
// S = M A symmetric: the Jacobian is -k_r (tr(S) I - S).
Mat3 analytic_jacobian(const Mat3& m, const RotationMatrix& at, double k_r) {
  const Mat3 s = m * at.matrix();
  return -k_r * (s.trace() * Mat3::Identity() - s);
}

}  // namespace

TEST_CASE("equilibria of a diagonal bearing matrix") {
  const Mat3 m = Vec3(1.0, 2.0, 3.0).asDiagonal();
  const EquilibriumSet set = enumerate_equilibria(3, m);
  REQUIRE(set.points.size() == 4);
  CHECK((set.points[0].matrix() - Mat3::Identity()).isZero(0.0));

  // The pi-rotations about the coordinate axes, in eigenvalue order.
  for (int k = 0; k < 3; ++k) {
    Vec3 axis = Vec3::Zero();
    axis[k] = 1.0;
    CHECK((set.points[k + 1].matrix() - angle_axis(kPi, axis).matrix()).norm() < 1e-12);
  }
  for (double residual : set.residuals) CHECK(residual <= 1e-10);
}

TEST_CASE("equilibria residuals for the cube scenario followers") {
  const ScenarioConfig cfg = testing::paper_scenario();
  for (AgentId i = 3; i <= 7; ++i) {  // follower 8 has a repeated eigenvalue
    const Mat3 m = bearing_matrix(i, cfg.topology, cfg.positions);
    const EquilibriumSet set = enumerate_equilibria(i, m);
    REQUIRE(set.points.size() == 4);
    for (double residual : set.residuals) CHECK(residual <= 1e-10);
  }

  // Follower 8: two orthogonal bearings, eigenvalue 1 repeats, isolation fails.
  const Mat3 m8 = bearing_matrix(8, cfg.topology, cfg.positions);
  CHECK_THROWS_AS(enumerate_equilibria(8, m8), std::invalid_argument);
}

TEST_CASE("points off the equilibrium set have nonzero field") {
  const Mat3 m = Vec3(1.0, 2.0, 3.0).asDiagonal();
  Rng rng(61);
  for (int k = 0; k < 50; ++k) {
    const RotationMatrix r = rng.rotation();
    if (rotation_distance(r) < 0.05 || rotation_distance(r) > 0.95) continue;
    CHECK(psi(m * r.matrix()).norm() > 1e-6);
  }
}

TEST_CASE("repeated eigenvalues are rejected") {
  CHECK_THROWS_AS(enumerate_equilibria(3, Vec3(1.0, 1.0, 2.0).asDiagonal()),
                  std::invalid_argument);
  CHECK_THROWS_AS(enumerate_equilibria(3, Mat3(Mat3::Identity())), std::invalid_argument);
}

TEST_CASE("linearization at the identity is stable and matches the expansion") {
  const Mat3 m = Vec3(1.0, 2.0, 3.0).asDiagonal();
  const RotationMatrix identity = RotationMatrix::identity();

  const Mat3 jac = unforced_jacobian(m, identity, 1.0);
  CHECK((jac - analytic_jacobian(m, identity, 1.0)).cwiseAbs().maxCoeff() < 1e-6);

  const auto eig = linearize_unforced(m, identity, 1.0);
  // -(lambda_j + lambda_l) over pairs: {-5, -4, -3}.
  CHECK(eig[0] == doctest::Approx(-5.0).epsilon(1e-6));
  CHECK(eig[1] == doctest::Approx(-4.0).epsilon(1e-6));
  CHECK(eig[2] == doctest::Approx(-3.0).epsilon(1e-6));
  CHECK(eig[2] < 0.0);
}

TEST_CASE("every undesired equilibrium has a positive eigenvalue") {
  const Mat3 m = Vec3(1.0, 2.0, 3.0).asDiagonal();
  const EquilibriumSet set = enumerate_equilibria(3, m);
  for (std::size_t k = 1; k < set.points.size(); ++k) {
    const Mat3 jac = unforced_jacobian(m, set.points[k], 1.0);
    CHECK((jac - analytic_jacobian(m, set.points[k], 1.0)).cwiseAbs().maxCoeff() < 1e-6);
    const auto eig = linearize_unforced(m, set.points[k], 1.0);
    CHECK(eig[2] > 1e-6);
  }

  // Same claim for the cube-scenario followers with distinct spectra.
  const ScenarioConfig cfg = testing::paper_scenario();
  for (AgentId i = 3; i <= 7; ++i) {
    const Mat3 mi = bearing_matrix(i, cfg.topology, cfg.positions);
    const EquilibriumSet eq = enumerate_equilibria(i, mi);
    CHECK(linearize_unforced(mi, eq.points[0], cfg.gains.k_r)[2] < 0.0);
    for (std::size_t k = 1; k < eq.points.size(); ++k) {
      CHECK(linearize_unforced(mi, eq.points[k], cfg.gains.k_r)[2] > 1e-6);
    }
  }
}

TEST_CASE("identity Jacobian is symmetric negative definite for the cube followers") {
  const ScenarioConfig cfg = testing::paper_scenario();
  for (AgentId i = 3; i <= cfg.agent_count; ++i) {
    const Mat3 m = bearing_matrix(i, cfg.topology, cfg.positions);
    const Mat3 jac = unforced_jacobian(m, RotationMatrix::identity(), cfg.gains.k_r);
    CHECK((jac - jac.transpose()).cwiseAbs().maxCoeff() < 1e-6);
    const auto eig = symmetric_eigenvalues(Mat3(0.5 * (jac + jac.transpose())));
    CHECK(eig[2] < 0.0);
  }
}

TEST_CASE("linearization scales linearly with the gain") {
  const Mat3 m = Vec3(0.5, 1.0, 2.5).asDiagonal();
  const auto base = linearize_unforced(m, RotationMatrix::identity(), 1.0);
  const auto doubled = linearize_unforced(m, RotationMatrix::identity(), 2.0);
  for (int k = 0; k < 3; ++k) {
    CHECK(doubled[k] == doctest::Approx(2.0 * base[k]).epsilon(1e-6));
  }
}

TEST_CASE("non-equilibrium base points are rejected") {
  const Mat3 m = Vec3(1.0, 2.0, 3.0).asDiagonal();
  CHECK_THROWS_AS(unforced_jacobian(m, angle_axis(0.3, Vec3::UnitX()), 1.0),
                  std::invalid_argument);
}

TEST_CASE("error dynamics: zero initial errors stay zero") {
  ScenarioConfig cfg = testing::paper_scenario();
  testing::make_estimates_exact(cfg);
  const TimeSeries series = simulate_error_dynamics(cfg, 1.0, 1e-3);
  for (std::size_t f = 0; f < series.followers.size(); ++f) {
    for (std::size_t k = 0; k < series.sample_count(); ++k) {
      CHECK(series.rot_err[f][k] <= 1e-12);
      CHECK(series.pos_err[f][k] <= 1e-12);
    }
  }
}

TEST_CASE("error dynamics: single-follower Lyapunov decrease") {
  ScenarioConfig cfg = testing::truncate_agents(testing::paper_scenario(), 3);
  std::vector<ErrorSample> log;
  simulate_error_dynamics(cfg, 10.0, 1e-3, 10, &log);
  const Mat3 m3 = bearing_matrix(3, cfg.topology, cfg.positions);
  double previous = std::numeric_limits<double>::infinity();
  for (const ErrorSample& sample : log) {
    const double lyapunov =
        0.25 * (m3 * (Mat3::Identity() - sample.r_tilde[0].matrix())).trace();
    CHECK(lyapunov <= previous + 1e-9);
    previous = lyapunov;
  }
  // It actually decays.
  CHECK(previous < 1e-3);
}

TEST_CASE("unstable escape from an undesired equilibrium") {
  const Mat3 m = Vec3(1.0, 2.0, 3.0).asDiagonal();
  const EquilibriumSet set = enumerate_equilibria(3, m);
  const RotationMatrix& worst = set.points[3];  // slowest escape for this spectrum
  const Vec3 direction = dominant_direction(unforced_jacobian(m, worst, 1.0));
  const auto escape = unstable_escape_time(m, worst, direction, 1e-6, 1.0, 1e-3, 60.0);
  REQUIRE(escape.has_value());
  CHECK(*escape > 0.0);
  CHECK(*escape < 30.0);

  // A perturbation along a stable direction of the same equilibrium stays
  // nearby for much longer than the unstable escape takes.
  const Mat3 jac = unforced_jacobian(m, worst, 1.0);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (jac + jac.transpose()));
  const Vec3 stable_dir = eig.eigenvectors().col(0);
  const auto stay = unstable_escape_time(m, worst, stable_dir, 1e-6, 1.0, 1e-3, *escape);
  CHECK_FALSE(stay.has_value());
}

TEST_CASE("ISS inequality holds along the cube-scenario error flow") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.sample_stride = 1;
  const TimeSeries series = simulate_error_dynamics(cfg, 5.0, 1e-3, 1, nullptr);
  const SpectralReport spectra = spectral_report(cfg.topology, cfg.positions);
  for (AgentId i = 3; i <= cfg.agent_count; ++i) {
    const DecayEnvelope env =
        iss_inequality_check(series, i, cfg.topology, spectra, cfg.gains.k_r);
    CHECK(env.violations == 0);
  }
}

TEST_CASE("tight single-follower form of the ISS bound") {
  // With exact neighbors the derivative obeys the pre-relaxation bound
  // -4 k (1 - x) x lam_Q, x = |Rt|_I^2.
  ScenarioConfig cfg = testing::truncate_agents(testing::paper_scenario(), 3);
  cfg.sample_stride = 1;
  const TimeSeries series = simulate_error_dynamics(cfg, 8.0, 1e-3, 1, nullptr);
  const SpectralReport spectra = spectral_report(cfg.topology, cfg.positions);
  const double lam_q = spectra.entry(3).lambda_min_q;
  const int col = series.column_of(3);
  for (std::size_t k = 1; k + 1 < series.sample_count(); ++k) {
    const double x = series.rot_err[col][k] * series.rot_err[col][k];
    const double xm = series.rot_err[col][k - 1] * series.rot_err[col][k - 1];
    const double xp = series.rot_err[col][k + 1] * series.rot_err[col][k + 1];
    const double lhs = (xp - xm) / (series.t[k + 1] - series.t[k - 1]);
    CHECK(lhs <= -4.0 * cfg.gains.k_r * lam_q * (1.0 - x) * x + 1e-3);
  }
}

TEST_CASE("GES envelope of the unforced position error") {
  // Exact attitudes, only follower 3 has a position error; its flow is the
  // unforced linear system.
  ScenarioConfig cfg = testing::truncate_agents(testing::paper_scenario(), 3);
  testing::make_estimates_exact(cfg);
  cfg.initial_estimates[3].position = Vec3(-2.0, 0.0, -1.0);
  const TimeSeries series = simulate_error_dynamics(cfg, 20.0, 1e-3);
  const auto p_eigen = symmetric_eigenvalues(projector_sum(3, cfg.topology, cfg.positions));
  const DecayEnvelope env = ges_envelope_check(series, 3, p_eigen[0], cfg.gains.k_p);
  CHECK(env.violations == 0);
  CHECK(env.fitted_rate > 0.9 * cfg.gains.k_p * p_eigen[0]);

  // A deliberately faster envelope must be violated somewhere.
  const DecayEnvelope squeezed = ges_envelope_check(series, 3, 3.0 * p_eigen[2], cfg.gains.k_p);
  CHECK(squeezed.violations > 0);
}
