#include "bearpose/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <thread>

#include "bearpose/sampling.hpp"

namespace bearpose {

namespace {

constexpr double kDivergenceGuard = 1e6;

// Mutable state of the stepping loop; positions and inertial bearings are
// constant and live in the context. All vectors are 1-based.
struct LoopState {
  double t = 0.0;
  std::vector<RotationMatrix> truth;
  std::vector<RotationMatrix> est_att;  // leaders mirror truth
  std::vector<Vec3> est_pos;
};

struct LoopRates {
  std::vector<Vec3> truth_omega;
  std::vector<Vec3> est_att;
  std::vector<Vec3> est_pos;
};

struct Context {
  const ScenarioConfig& cfg;
  // bearing[i][k]: inertial unit vector from i toward neighbors[i][k].
  std::vector<std::vector<Vec3>> bearing;

  explicit Context(const ScenarioConfig& config) : cfg(config) {
    bearing.resize(cfg.agent_count + 1);
    for (AgentId i = 1; i <= cfg.agent_count; ++i) {
      for (AgentId j : cfg.topology.neighbors[i]) {
        bearing[i].push_back(inertial_bearing(cfg.positions, i, j));
      }
    }
  }
};

LoopState initial_state(const ScenarioConfig& cfg) {
  const int n = cfg.agent_count;
  LoopState s;
  s.truth.assign(n + 1, RotationMatrix::identity());
  s.est_att.assign(n + 1, RotationMatrix::identity());
  s.est_pos.assign(n + 1, Vec3::Zero());
  for (AgentId l : Topology::kLeaders) s.est_pos[l] = cfg.positions[l];
  for (AgentId i = 3; i <= n; ++i) {
    const InitialEstimate& e = cfg.initial_estimates[i];
    s.est_att[i] = angle_axis(e.attitude_angle, e.attitude_axis);
    s.est_pos[i] = e.position;
  }
  return s;
}

WorldState make_world(const Context& ctx, double t, const std::vector<RotationMatrix>& truth) {
  WorldState w;
  w.t = t;
  w.positions = ctx.cfg.positions;
  w.attitudes = truth;
  return w;
}

ObserverState make_estimates(const LoopState& s) {
  ObserverState est;
  est.attitude = s.est_att;
  est.position = s.est_pos;
  return est;
}

// One synchronous evaluation of all rates at stage time t. Sensor data is
// synthesized from the true state here; the update laws themselves are the
// observers-module functions and receive measurements and packets only.
void compute_rates(const Context& ctx, const LoopState& s, double t,
                   std::vector<FollowerInputs>& workspace, ObserverState& est_view,
                   LoopRates& out) {
  const int n = ctx.cfg.agent_count;
  out.truth_omega.assign(n + 1, Vec3::Zero());
  out.est_att.assign(n + 1, Vec3::Zero());
  out.est_pos.assign(n + 1, Vec3::Zero());
  for (AgentId i = 1; i <= n; ++i) out.truth_omega[i] = ctx.cfg.omega[i].eval(t);

  est_view.attitude = s.est_att;
  est_view.position = s.est_pos;
  workspace.resize(n + 1);
  for (AgentId i = 3; i <= n; ++i) {
    FollowerInputs& inputs = workspace[i];
    inputs.omega = out.truth_omega[i];  // own gyro measurement
    inputs.own_bearings.clear();
    inputs.packets.clear();
    const auto& adj = ctx.cfg.topology.neighbors[i];
    for (std::size_t k = 0; k < adj.size(); ++k) {
      const AgentId j = adj[k];
      const Vec3& b_ij = ctx.bearing[i][k];
      inputs.own_bearings.push_back({i, j, s.truth[i].rotate_back(b_ij)});
      NeighborPacket pkt;
      pkt.sender = j;
      pkt.attitude_estimate = s.est_att[j];
      pkt.position_estimate = s.est_pos[j];
      pkt.bearing_to_receiver = s.truth[j].rotate_back(-b_ij);  // b_ji in j's frame
      inputs.packets.push_back(pkt);
    }
    const FollowerRates rates = follower_rates(i, est_view, inputs, ctx.cfg.gains,
                                               ctx.cfg.topology);
    out.est_att[i] = rates.attitude_body_rate;
    out.est_pos[i] = rates.position_rate;
  }
}

// Advances truth and estimates from `base` with the given rates. Leader
// estimate rows are refreshed from the world view, of which only rows 1 and
// 2 are read; the filter seam lets tests corrupt follower rows to prove it.
void apply_step(const Context& ctx, const LoopState& base, double h, const LoopRates& r,
                const WorldFilter& filter, LoopState& out) {
  const int n = ctx.cfg.agent_count;
  out.t = base.t + h;
  out.truth.resize(n + 1);
  out.est_att.resize(n + 1);
  out.est_pos.resize(n + 1);
  for (AgentId i = 1; i <= n; ++i) {
    out.truth[i] = base.truth[i] * exp_so3(h * r.truth_omega[i]);
  }
  for (AgentId i = 3; i <= n; ++i) {
    out.est_att[i] = base.est_att[i] * exp_so3(h * r.est_att[i]);
    out.est_pos[i] = base.est_pos[i] + h * r.est_pos[i];
  }
  if (!filter) {
    for (AgentId l : Topology::kLeaders) {
      out.est_att[l] = out.truth[l];
      out.est_pos[l] = ctx.cfg.positions[l];
    }
  } else {
    const WorldState view = filter(make_world(ctx, out.t, out.truth));
    for (AgentId l : Topology::kLeaders) {
      out.est_att[l] = view.attitudes.at(l);
      out.est_pos[l] = view.positions.at(l);
    }
  }
}

class MetricsSink {
 public:
  explicit MetricsSink(const ScenarioConfig& cfg) : cfg_(cfg) {
    for (AgentId i = 3; i <= cfg.agent_count; ++i) series_.followers.push_back(i);
    const std::size_t m = series_.followers.size();
    series_.rot_err.resize(m);
    series_.pos_err.resize(m);
    series_.pos_est_err.resize(m);
  }

  void sample(const LoopState& s) {
    series_.t.push_back(s.t);
    double rot_sum = 0.0, pos_sum = 0.0, pos_est_sum = 0.0;
    for (std::size_t f = 0; f < series_.followers.size(); ++f) {
      const AgentId i = series_.followers[f];
      const RotationMatrix r_tilde = s.truth[i] * s.est_att[i].transposed();
      const double rerr = rotation_distance(r_tilde);
      const double perr = (cfg_.positions[i] - r_tilde * s.est_pos[i]).norm();
      const double phat_err = (cfg_.positions[i] - s.est_pos[i]).norm();
      series_.rot_err[f].push_back(rerr);
      series_.pos_err[f].push_back(perr);
      series_.pos_est_err[f].push_back(phat_err);
      rot_sum += rerr;
      pos_sum += perr;
      pos_est_sum += phat_err;
    }
    const double m = static_cast<double>(series_.followers.size());
    series_.rot_err_avg.push_back(rot_sum / m);
    series_.pos_err_avg.push_back(pos_sum / m);
    series_.pos_est_err_avg.push_back(pos_est_sum / m);
  }

  TimeSeries take() { return std::move(series_); }

 private:
  const ScenarioConfig& cfg_;
  TimeSeries series_;
};

}  // namespace

int TimeSeries::column_of(AgentId follower) const {
  for (std::size_t f = 0; f < followers.size(); ++f) {
    if (followers[f] == follower) return static_cast<int>(f);
  }
  throw std::out_of_range("TimeSeries: no follower " + std::to_string(follower));
}

void ErrorStateLog::on_sample(double t, const WorldState& world, const ObserverState& est) {
  ErrorSample sample;
  sample.t = t;
  for (AgentId i = 3; i <= world.agent_count(); ++i) {
    const RotationMatrix r_tilde = world.attitudes[i] * est.attitude[i].transposed();
    sample.r_tilde.push_back(r_tilde);
    sample.p_tilde.push_back(world.positions[i] - r_tilde * est.position[i]);
  }
  samples_.push_back(std::move(sample));
}

TimeSeries run(const ScenarioConfig& cfg) { return run(cfg, nullptr, {}); }
TimeSeries run(const ScenarioConfig& cfg, SampleSink* extra_sink) {
  return run(cfg, extra_sink, {});
}

TimeSeries run(const ScenarioConfig& cfg, SampleSink* extra_sink,
               const WorldFilter& estimate_truth_filter) {
  const ValidationResult check = validate_topology(cfg.topology, cfg.positions);
  if (!check.ok) throw ScenarioError("topology: " + check.message);

  Context ctx(cfg);
  LoopState state = initial_state(cfg);
  LoopState mid, next;
  LoopRates k1, k2;
  std::vector<FollowerInputs> workspace;
  ObserverState est_view;
  MetricsSink metrics(cfg);

  const double h = cfg.step;
  const long long n_steps = std::llround(cfg.horizon / h);
  const long long stride = cfg.sample_stride;

  auto emit = [&](const LoopState& s) {
    metrics.sample(s);
    if (extra_sink != nullptr) {
      extra_sink->on_sample(s.t, make_world(ctx, s.t, s.truth), make_estimates(s));
    }
  };

  for (long long k = 0;; ++k) {
    if (k % stride == 0 || k == n_steps) emit(state);
    if (k == n_steps) break;

    const double t = static_cast<double>(k) * h;
    compute_rates(ctx, state, t, workspace, est_view, k1);
    apply_step(ctx, state, 0.5 * h, k1, estimate_truth_filter, mid);
    compute_rates(ctx, mid, t + 0.5 * h, workspace, est_view, k2);
    apply_step(ctx, state, h, k2, estimate_truth_filter, next);
    std::swap(state, next);
    state.t = static_cast<double>(k + 1) * h;

    for (AgentId i = 3; i <= cfg.agent_count; ++i) {
      if (!(state.est_pos[i].norm() <= kDivergenceGuard)) {
        throw DivergenceError("position estimate of agent " + std::to_string(i) +
                              " exceeded the divergence guard at t = " + std::to_string(state.t));
      }
    }
  }

  return metrics.take();
}

std::string csv_string(const TimeSeries& series) {
  std::string out = "t";
  auto add_columns = [&](const char* prefix) {
    for (AgentId i : series.followers) {
      out += ",";
      out += prefix;
      out += std::to_string(i);
    }
  };
  add_columns("rerr_");
  add_columns("perr_");
  add_columns("phat_err_");
  out += ",rerr_avg,perr_avg\n";

  char buf[40];
  auto append = [&](double v) {
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    out += buf;
  };
  for (std::size_t k = 0; k < series.sample_count(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", series.t[k]);
    out += buf;
    for (std::size_t f = 0; f < series.followers.size(); ++f) append(series.rot_err[f][k]);
    for (std::size_t f = 0; f < series.followers.size(); ++f) append(series.pos_err[f][k]);
    for (std::size_t f = 0; f < series.followers.size(); ++f) append(series.pos_est_err[f][k]);
    append(series.rot_err_avg[k]);
    append(series.pos_err_avg[k]);
    out += "\n";
  }
  return out;
}

void export_csv(const TimeSeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_csv: cannot open " + path);
  const std::string body = csv_string(series);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("export_csv: write failed for " + path);
}

RunSummary summarize(const ScenarioConfig& cfg, const TimeSeries& series, double tolerance) {
  if (series.sample_count() == 0) throw std::invalid_argument("summarize: empty series");
  RunSummary s;
  s.scenario = cfg.name;
  s.config_hash = config_hash(cfg);
  s.step = cfg.step;
  s.horizon = cfg.horizon;
  s.tolerance = tolerance;
  const std::size_t last = series.sample_count() - 1;
  s.final_time = series.t[last];
  s.final_rot_err_avg = series.rot_err_avg[last];
  s.final_pos_err_avg = series.pos_err_avg[last];
  s.final_pos_est_err_avg = series.pos_est_err_avg[last];
  s.all_converged = true;
  for (std::size_t f = 0; f < series.followers.size(); ++f) {
    FollowerSummary fs;
    fs.agent = series.followers[f];
    fs.final_rot_err = series.rot_err[f][last];
    fs.final_pos_err = series.pos_err[f][last];
    fs.final_pos_est_err = series.pos_est_err[f][last];
    fs.converged = fs.final_rot_err < tolerance && fs.final_pos_err < tolerance;
    s.all_converged = s.all_converged && fs.converged;
    s.followers.push_back(fs);
  }
  return s;
}

nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j;
  j["scenario"] = s.scenario;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, s.config_hash);
  j["config_hash"] = hash;
  j["step"] = s.step;
  j["horizon"] = s.horizon;
  j["tolerance"] = s.tolerance;
  j["final_time"] = s.final_time;
  j["final"] = {{"rot_err_avg", s.final_rot_err_avg},
                {"pos_err_avg", s.final_pos_err_avg},
                {"pos_est_err_avg", s.final_pos_est_err_avg}};
  nlohmann::json followers = nlohmann::json::object();
  for (const FollowerSummary& f : s.followers) {
    followers[std::to_string(f.agent)] = {{"rot_err", f.final_rot_err},
                                          {"pos_err", f.final_pos_err},
                                          {"pos_est_err", f.final_pos_est_err},
                                          {"converged", f.converged}};
  }
  j["followers"] = followers;
  j["all_converged"] = s.all_converged;
  return j;
}

SweepSummary basin_sweep(const ScenarioConfig& cfg, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("basin_sweep: trials must be >= 1");

  struct TrialResult {
    bool converged = false;
    double rot_err = 0.0;
    double pos_err = 0.0;
  };

  const double tolerance = 1e-3;
  auto run_trial = [&](int trial) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(trial)));
    ScenarioConfig trial_cfg = cfg;
    for (AgentId i = 3; i <= cfg.agent_count; ++i) {
      const RotationMatrix r = rng.rotation();
      const Eigen::AngleAxisd aa(r.matrix());
      trial_cfg.initial_estimates[i].attitude_angle = aa.angle();
      trial_cfg.initial_estimates[i].attitude_axis =
          aa.angle() > 0.0 ? Vec3(aa.axis()) : Vec3::UnitX();
      trial_cfg.initial_estimates[i].position = rng.in_box(cfg.sweep_box_half_extent);
    }
    const TimeSeries series = run(trial_cfg);
    const std::size_t last = series.sample_count() - 1;
    TrialResult result;
    for (std::size_t f = 0; f < series.followers.size(); ++f) {
      result.rot_err = std::max(result.rot_err, series.rot_err[f][last]);
      result.pos_err = std::max(result.pos_err, series.pos_err[f][last]);
    }
    result.converged = result.rot_err < tolerance && result.pos_err < tolerance;
    return result;
  };

  std::vector<TrialResult> results(trials);
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(trials));
  std::atomic<int> cursor{0};
  std::vector<std::future<void>> futures;
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&]() {
      for (int k = cursor.fetch_add(1); k < trials; k = cursor.fetch_add(1)) {
        results[k] = run_trial(k);
      }
    }));
  }
  for (auto& f : futures) f.get();

  SweepSummary summary;
  summary.trials = trials;
  summary.tolerance = tolerance;
  summary.seed = seed;
  summary.box_half_extent = cfg.sweep_box_half_extent;
  for (int k = 0; k < trials; ++k) {
    summary.trial_final_rot_err.push_back(results[k].rot_err);
    summary.trial_final_pos_err.push_back(results[k].pos_err);
    if (results[k].converged) {
      ++summary.converged;
    } else {
      summary.failed_trials.push_back(k);
    }
  }
  return summary;
}

nlohmann::json to_json(const SweepSummary& s) {
  nlohmann::json j;
  j["trials"] = s.trials;
  j["converged"] = s.converged;
  j["fraction"] = s.trials > 0 ? static_cast<double>(s.converged) / s.trials : 0.0;
  j["tolerance"] = s.tolerance;
  j["seed"] = s.seed;
  j["box_half_extent"] = s.box_half_extent;
  j["sampler"] = s.sampler;
  j["failed_trials"] = s.failed_trials;
  return j;
}

}  // namespace bearpose
