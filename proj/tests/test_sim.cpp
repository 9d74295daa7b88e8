#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

#include "bearpose/analysis.hpp"
#include "bearpose/sampling.hpp"
#include "bearpose/sim.hpp"
#include "support/test_scenarios.hpp"

using namespace bearpose;

namespace {

// Collects full (world, estimates) snapshots at sample times.
class SnapshotSink : public SampleSink {
 public:
  std::vector<WorldState> worlds;
  std::vector<ObserverState> estimates;
  void on_sample(double, const WorldState& w, const ObserverState& est) override {
    worlds.push_back(w);
    estimates.push_back(est);
  }
};

}  // namespace

TEST_CASE("scenario loading") {
  SUBCASE("shipped scenario") {
    const ScenarioConfig cfg = testing::paper_scenario();
    CHECK(cfg.agent_count == 8);
    CHECK(cfg.gains.k_r == 1.0);
    CHECK(cfg.gains.k_p == 1.0);
    for (AgentId i = 3; i <= 8; ++i) {
      for (double g : cfg.topology.edge_gains[i]) CHECK(g == 1.0);
    }
    CHECK(cfg.step == 1e-3);
    CHECK(cfg.horizon == 30.0);
    CHECK((cfg.positions[7] - Vec3(2.0, 2.0, 2.0)).norm() == 0.0);
    CHECK(cfg.initial_estimates[6].attitude_angle ==
          doctest::Approx(0.9 * 3.14159265358979).epsilon(1e-9));
  }

  SUBCASE("missing field names the path") {
    nlohmann::json doc = to_json(testing::paper_scenario());
    doc["positions"].erase("2");
    CHECK_THROWS_WITH_AS(load_scenario(doc), "positions.2: missing", ScenarioError);
  }

  SUBCASE("non-positive gains are rejected") {
    nlohmann::json doc = to_json(testing::paper_scenario());
    doc["gains"]["k_R"] = 0.0;
    CHECK_THROWS_WITH_AS(load_scenario(doc), "gains.k_R: must be positive", ScenarioError);
    doc = to_json(testing::paper_scenario());
    doc["edges"][0]["gain"] = -1.0;
    CHECK_THROWS_AS(load_scenario(doc), ScenarioError);
  }

  SUBCASE("zero horizon is rejected") {
    nlohmann::json doc = to_json(testing::paper_scenario());
    doc["integration"]["horizon"] = 0.0;
    CHECK_THROWS_WITH_AS(load_scenario(doc), "integration.horizon: must be positive",
                         ScenarioError);
  }

  SUBCASE("leader initial estimates are rejected") {
    nlohmann::json doc = to_json(testing::paper_scenario());
    doc["initial_estimates"]["1"] = doc["initial_estimates"]["3"];
    CHECK_THROWS_AS(load_scenario(doc), ScenarioError);
  }

  SUBCASE("round trip through the canonical serialization") {
    const ScenarioConfig cfg = testing::paper_scenario();
    const ScenarioConfig reloaded = load_scenario(to_json(cfg));
    CHECK(config_hash(cfg) == config_hash(reloaded));
  }
}

TEST_CASE("exact initial estimates stay at equilibrium") {
  ScenarioConfig cfg = testing::paper_scenario();
  testing::make_estimates_exact(cfg);
  cfg.horizon = 2.0;
  const TimeSeries series = run(cfg);
  for (std::size_t f = 0; f < series.followers.size(); ++f) {
    for (std::size_t k = 0; k < series.sample_count(); ++k) {
      CHECK(series.rot_err[f][k] <= 1e-9);
      CHECK(series.pos_err[f][k] <= 1e-9);
      CHECK(series.pos_est_err[f][k] <= 1e-9);
    }
  }
}

TEST_CASE("runs are deterministic") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.horizon = 1.0;
  const std::string a = csv_string(run(cfg));
  const std::string b = csv_string(run(cfg));
  CHECK(a == b);
}

TEST_CASE("csv layout") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.horizon = 0.05;
  cfg.sample_stride = 10;
  const TimeSeries series = run(cfg);
  const std::string csv = csv_string(series);

  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header ==
        "t,rerr_3,rerr_4,rerr_5,rerr_6,rerr_7,rerr_8,"
        "perr_3,perr_4,perr_5,perr_6,perr_7,perr_8,"
        "phat_err_3,phat_err_4,phat_err_5,phat_err_6,phat_err_7,phat_err_8,"
        "rerr_avg,perr_avg");
  // 21 columns for 8 agents.
  CHECK(std::count(header.begin(), header.end(), ',') == 20);

  SUBCASE("empty series exports the header only") {
    TimeSeries empty;
    empty.followers = series.followers;
    empty.rot_err.resize(6);
    empty.pos_err.resize(6);
    empty.pos_est_err.resize(6);
    const std::string text = csv_string(empty);
    CHECK(text == header + "\n");
  }

  SUBCASE("re-export is byte identical") {
    const std::string path_a = "series_a.csv";
    const std::string path_b = "series_b.csv";
    export_csv(series, path_a);
    export_csv(series, path_b);
    std::ifstream in_a(path_a), in_b(path_b);
    const std::string body_a((std::istreambuf_iterator<char>(in_a)),
                             std::istreambuf_iterator<char>());
    const std::string body_b((std::istreambuf_iterator<char>(in_b)),
                             std::istreambuf_iterator<char>());
    CHECK(body_a == body_b);
    CHECK(body_a == csv);
  }
}

TEST_CASE("truth in the coupled loop matches the standalone stepper") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.horizon = 0.5;
  cfg.sample_stride = 100;

  SnapshotSink grab;
  run(cfg, &grab);

  WorldState w;
  w.positions = cfg.positions;
  w.attitudes.assign(cfg.agent_count + 1, RotationMatrix::identity());
  std::size_t next_sample = 0;
  for (long long k = 0; k <= 500; ++k) {
    if (k % 100 == 0) {
      w.t = static_cast<double>(k) * cfg.step;
      const WorldState& sampled = grab.worlds.at(next_sample++);
      for (AgentId i = 1; i <= cfg.agent_count; ++i) {
        CHECK((sampled.attitudes[i].matrix() - w.attitudes[i].matrix()).cwiseAbs().maxCoeff() ==
              0.0);
      }
    }
    if (k < 500) {
      const double t = static_cast<double>(k) * cfg.step;
      WorldState at_t = w;
      at_t.t = t;
      w = step_truth(at_t, cfg.omega, cfg.step);
    }
  }
}

TEST_CASE("attitude error flow ignores the angular velocity input") {
  // Replaying with zeroed signals (frozen truth) must reproduce the same
  // attitude error trajectories: the error flow is autonomous.
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.step = 1e-4;
  cfg.horizon = 2.0;
  cfg.sample_stride = 100;
  ErrorStateLog with_motion;
  run(cfg, &with_motion);

  ScenarioConfig frozen = cfg;
  for (AgentId i = 1; i <= cfg.agent_count; ++i) frozen.omega[i] = OmegaSignal{};
  ErrorStateLog without_motion;
  run(frozen, &without_motion);

  REQUIRE(with_motion.samples().size() == without_motion.samples().size());
  double worst = 0.0;
  for (std::size_t s = 0; s < with_motion.samples().size(); ++s) {
    const ErrorSample& a = with_motion.samples()[s];
    const ErrorSample& b = without_motion.samples()[s];
    for (std::size_t f = 0; f < a.r_tilde.size(); ++f) {
      worst = std::max(worst, testing::rotation_gap(a.r_tilde[f], b.r_tilde[f]));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("correction identity holds along a simulated trajectory") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.horizon = 0.8;
  cfg.sample_stride = 40;

  SnapshotSink snaps;
  run(cfg, &snaps);
  REQUIRE(snaps.worlds.size() > 10);

  for (std::size_t s = 0; s < snaps.worlds.size(); ++s) {
    const WorldState& w = snaps.worlds[s];
    const ObserverState& est = snaps.estimates[s];
    for (AgentId i = 3; i <= cfg.agent_count; ++i) {
      std::vector<BearingMeasurement> bearings;
      std::vector<NeighborPacket> packets;
      for (AgentId j : cfg.topology.neighbors[i]) {
        bearings.push_back(body_bearing(w, i, j));
        NeighborPacket pkt;
        pkt.sender = j;
        pkt.attitude_estimate = est.attitude[j];
        pkt.position_estimate = est.position[j];
        pkt.bearing_to_receiver = body_bearing(w, j, i).body_bearing;
        packets.push_back(pkt);
      }
      const Vec3 measured = correction_vector(i, est, packets, bearings, cfg.topology);

      const Mat3 m_i = bearing_matrix(i, cfg.topology, cfg.positions);
      const Mat3 rt_i = (w.attitudes[i] * est.attitude[i].transposed()).matrix();
      Vec3 closed_form = -2.0 * psi(m_i * rt_i);
      const auto& adj = cfg.topology.neighbors[i];
      for (std::size_t k = 0; k < adj.size(); ++k) {
        const Vec3 b = inertial_bearing(cfg.positions, i, adj[k]);
        const Mat3 rt_j =
            (w.attitudes[adj[k]] * est.attitude[adj[k]].transposed()).matrix();
        closed_form += cfg.topology.edge_gains[i][k] *
                       Vec3((rt_j.transpose() - Mat3::Identity()) * b)
                           .cross(Vec3(rt_i.transpose() * b));
      }
      CHECK((measured - closed_form).norm() < 1e-12);
    }
  }
}

TEST_CASE("attitudes stay on SO(3) for a whole run") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.horizon = 5.0;
  SnapshotSink snaps;
  run(cfg, &snaps);
  for (std::size_t s = 0; s < snaps.worlds.size(); ++s) {
    for (AgentId i = 1; i <= cfg.agent_count; ++i) {
      CHECK(snaps.worlds[s].attitudes[i].orthonormality_defect() <= 1e-9);
      CHECK(snaps.estimates[s].attitude[i].orthonormality_defect() <= 1e-9);
    }
  }
}

TEST_CASE("leader estimates mirror the true pose bit for bit") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.horizon = 1.0;
  SnapshotSink snaps;
  run(cfg, &snaps);
  for (std::size_t s = 0; s < snaps.worlds.size(); ++s) {
    for (AgentId l : Topology::kLeaders) {
      CHECK((snaps.estimates[s].attitude[l].matrix() - snaps.worlds[s].attitudes[l].matrix())
                .cwiseAbs()
                .maxCoeff() == 0.0);
      CHECK(snaps.estimates[s].position[l] == cfg.positions[l]);
    }
  }
}

TEST_CASE("halving the step changes the outcome at second order") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.horizon = 2.0;

  auto final_errors = [&](double h) {
    ScenarioConfig c = cfg;
    c.step = h;
    c.sample_stride = 1000000;  // only first and last samples
    const TimeSeries s = run(c);
    return std::pair{s.rot_err_avg.back(), s.pos_err_avg.back()};
  };

  const auto [rot_ref, pos_ref] = final_errors(0.5e-4);
  const auto [rot_4h, pos_4h] = final_errors(4e-3);
  const auto [rot_2h, pos_2h] = final_errors(2e-3);
  // Error vs the reference shrinks by about 4 when h halves.
  const double ratio_rot = std::abs(rot_4h - rot_ref) / std::abs(rot_2h - rot_ref);
  const double ratio_pos = std::abs(pos_4h - pos_ref) / std::abs(pos_2h - pos_ref);
  CHECK(ratio_rot > 2.5);
  CHECK(ratio_rot < 6.5);
  CHECK(ratio_pos > 2.5);
  CHECK(ratio_pos < 6.5);
}

TEST_CASE("single-follower position error follows the matrix exponential") {
  // Exact attitudes and exact neighbor estimates: ptilde solves a constant
  // linear system; cross-check against its eigendecomposition solution.
  ScenarioConfig cfg = testing::truncate_agents(testing::paper_scenario(), 3);
  testing::make_estimates_exact(cfg);
  cfg.initial_estimates[3].position = Vec3(-2.0, 0.0, -1.0);
  cfg.horizon = 6.0;
  cfg.sample_stride = 200;

  ErrorStateLog log;
  run(cfg, &log);

  const Mat3 p_sum = projector_sum(3, cfg.topology, cfg.positions);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(p_sum);
  const Vec3 p0 = cfg.positions[3] - cfg.initial_estimates[3].position;
  for (const ErrorSample& s : log.samples()) {
    Vec3 expected = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
      const Vec3 v = eig.eigenvectors().col(k);
      expected += std::exp(-cfg.gains.k_p * eig.eigenvalues()[k] * s.t) * v.dot(p0) * v;
    }
    CHECK((s.p_tilde[0] - expected).norm() < 1e-5);
  }

  SUBCASE("doubling k_p speeds up the decay at every sample") {
    ScenarioConfig faster = cfg;
    faster.gains.k_p = 2.0;
    ErrorStateLog log_fast;
    run(faster, &log_fast);
    REQUIRE(log_fast.samples().size() == log.samples().size());
    for (std::size_t s = 1; s < log.samples().size(); ++s) {
      CHECK(log_fast.samples()[s].p_tilde[0].norm() <=
            log.samples()[s].p_tilde[0].norm() + 1e-12);
    }
  }
}

TEST_CASE("average attitude error drops by 10x between t=5 and t=20") {
  const ScenarioConfig cfg = testing::paper_scenario();
  const TimeSeries s = run(cfg);
  double at5 = 0.0, at20 = 0.0;
  for (std::size_t k = 0; k < s.sample_count(); ++k) {
    if (s.t[k] <= 5.0) at5 = s.rot_err_avg[k];
    if (s.t[k] <= 20.0) at20 = s.rot_err_avg[k];
  }
  CHECK(at20 < 0.1 * at5);
}

TEST_CASE("single follower with zero angular velocity decreases the Lyapunov function") {
  ScenarioConfig cfg = testing::truncate_agents(testing::paper_scenario(), 3);
  for (AgentId i = 1; i <= cfg.agent_count; ++i) cfg.omega[i] = OmegaSignal{};
  cfg.horizon = 10.0;

  ErrorStateLog log;
  run(cfg, &log);
  const Mat3 m3 = bearing_matrix(3, cfg.topology, cfg.positions);
  double previous = std::numeric_limits<double>::infinity();
  for (const ErrorSample& sample : log.samples()) {
    const double lyapunov =
        0.25 * (m3 * (Mat3::Identity() - sample.r_tilde[0].matrix())).trace();
    CHECK(lyapunov <= previous + 1e-9);
    previous = lyapunov;
  }
  CHECK(previous < 1e-4);
}

TEST_CASE("divergence guard trips on an unstable configuration") {
  // Flip the sign of the position gain by hand (the loader would reject it);
  // the anti-consensus flow blows up and must be caught.
  ScenarioConfig cfg = testing::truncate_agents(testing::paper_scenario(), 3);
  cfg.gains.k_p = -40.0;
  cfg.horizon = 30.0;
  CHECK_THROWS_AS(run(cfg), DivergenceError);
}

TEST_CASE("estimates never read follower ground truth") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.horizon = 1.0;

  const std::string clean = csv_string(run(cfg));

  // Corrupt every follower row of the world snapshot handed to the estimate
  // update; leaders stay intact. Bit-identical output proves the update only
  // reads the leader rows.
  WorldFilter corrupt = [](const WorldState& w) {
    WorldState garbled = w;
    Rng rng(0xdeadbeef);
    for (AgentId i = 3; i <= w.agent_count(); ++i) {
      garbled.attitudes[i] = rng.rotation();
      garbled.positions[i] = rng.in_box(100.0);
    }
    return garbled;
  };
  const std::string witness = csv_string(run(cfg, nullptr, corrupt));
  CHECK(clean == witness);
}

TEST_CASE("basin sweep") {
  ScenarioConfig cfg = testing::paper_scenario();
  cfg.horizon = 0.2;  // smoke-level horizon; the acceptance suite runs it long

  SUBCASE("reproducible under a fixed seed") {
    const SweepSummary a = basin_sweep(cfg, 2, 7);
    const SweepSummary b = basin_sweep(cfg, 2, 7);
    CHECK(a.trial_final_rot_err == b.trial_final_rot_err);
    CHECK(a.trial_final_pos_err == b.trial_final_pos_err);
    CHECK(a.converged == b.converged);
    CHECK(to_json(a).dump() == to_json(b).dump());
  }

  SUBCASE("trial count is validated") {
    CHECK_THROWS_AS(basin_sweep(cfg, 0, 7), std::invalid_argument);
  }
}

TEST_CASE("run summary") {
  ScenarioConfig cfg = testing::paper_scenario();
  testing::make_estimates_exact(cfg);
  cfg.horizon = 0.1;
  const TimeSeries series = run(cfg);
  const RunSummary summary = summarize(cfg, series);
  CHECK(summary.all_converged);
  CHECK(summary.followers.size() == 6);
  CHECK(summary.final_time == doctest::Approx(0.1));
  const nlohmann::json j = to_json(summary);
  CHECK(j["all_converged"].get<bool>());
  CHECK(j["followers"]["3"]["converged"].get<bool>());
  CHECK(j["config_hash"].get<std::string>().size() == 16);
}
