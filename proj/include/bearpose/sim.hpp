#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bearpose/observers.hpp"
#include "bearpose/scenario.hpp"

namespace bearpose {

/// Sampled error metrics of one run. Column f of the per-follower vectors
/// corresponds to followers[f]; averages are over followers only.
struct TimeSeries {
  std::vector<AgentId> followers;
  std::vector<double> t;
  std::vector<std::vector<double>> rot_err;      // |Rtilde_i|_I
  std::vector<std::vector<double>> pos_err;      // ||p_i - Rtilde_i phat_i||
  std::vector<std::vector<double>> pos_est_err;  // ||p_i - phat_i||
  std::vector<double> rot_err_avg;
  std::vector<double> pos_err_avg;
  std::vector<double> pos_est_err_avg;

  std::size_t sample_count() const { return t.size(); }
  int column_of(AgentId follower) const;
};

/// Full error state at one sample, follower-ordered as TimeSeries::followers.
struct ErrorSample {
  double t = 0.0;
  std::vector<RotationMatrix> r_tilde;
  std::vector<Vec3> p_tilde;
};

/// Receives every sampled (truth, estimate) pair during a run.
class SampleSink {
 public:
  virtual ~SampleSink() = default;
  virtual void on_sample(double t, const WorldState& world, const ObserverState& estimates) = 0;
};

/// Records follower error states (for cross-checks against the closed-form
/// error dynamics).
class ErrorStateLog : public SampleSink {
 public:
  void on_sample(double t, const WorldState& world, const ObserverState& estimates) override;
  const std::vector<ErrorSample>& samples() const { return samples_; }

 private:
  std::vector<ErrorSample> samples_;
};

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Test seam: transforms the world snapshot handed to the estimate-update
/// side of the loop (leader-pose source). Sensing always sees the real world.
using WorldFilter = std::function<WorldState(const WorldState&)>;

/// Runs the coupled truth/observer simulation. Truth attitudes and attitude
/// estimates advance with a two-stage midpoint exponential step, position
/// estimates with the matching midpoint rule; all agents update
/// synchronously within a stage. Deterministic for a given config.
TimeSeries run(const ScenarioConfig& config);
TimeSeries run(const ScenarioConfig& config, SampleSink* extra_sink);
TimeSeries run(const ScenarioConfig& config, SampleSink* extra_sink,
               const WorldFilter& estimate_truth_filter);

std::string csv_string(const TimeSeries& series);
void export_csv(const TimeSeries& series, const std::string& path);

struct FollowerSummary {
  AgentId agent = 0;
  double final_rot_err = 0.0;
  double final_pos_err = 0.0;
  double final_pos_est_err = 0.0;
  bool converged = false;
};

struct RunSummary {
  std::string scenario;
  std::uint64_t config_hash = 0;
  double step = 0.0;
  double horizon = 0.0;
  double tolerance = 0.0;
  double final_time = 0.0;
  double final_rot_err_avg = 0.0;
  double final_pos_err_avg = 0.0;
  double final_pos_est_err_avg = 0.0;
  std::vector<FollowerSummary> followers;
  bool all_converged = false;
};

/// Convergence of a follower: final |Rtilde|_I and ||ptilde|| both below
/// `tolerance`.
RunSummary summarize(const ScenarioConfig& config, const TimeSeries& series,
                     double tolerance = 1e-3);
nlohmann::json to_json(const RunSummary& summary);

struct SweepSummary {
  int trials = 0;
  int converged = 0;
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
  double box_half_extent = 0.0;
  std::string sampler = "uniform-quaternion";
  std::vector<int> failed_trials;
  std::vector<double> trial_final_rot_err;  // max over followers, per trial
  std::vector<double> trial_final_pos_err;
};

/// Samples follower initial attitude estimates uniformly on SO(3) and
/// initial position estimates uniformly in the configured box, then counts
/// trials whose final errors are below the tolerance. Trials run in parallel
/// but the summary is reduced in trial order, so it is reproducible.
SweepSummary basin_sweep(const ScenarioConfig& config, int trials, std::uint64_t seed);
nlohmann::json to_json(const SweepSummary& summary);

}  // namespace bearpose
