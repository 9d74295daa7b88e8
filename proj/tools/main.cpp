// Command-line front end: scenario validation, simulation runs, equilibrium
// analysis and basin sweeps. Every report is printed as text and optionally
// mirrored to JSON so CI can assert on structure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bearpose/analysis.hpp"
#include "bearpose/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path g_exe_dir;

// Accepts a path or a bare scenario name; bare names resolve against the
// scenario directories of the working tree and the installed layout.
fs::path resolve_scenario(const std::string& arg) {
  const fs::path direct(arg);
  if (fs::exists(direct) && fs::is_regular_file(direct)) return direct;
  std::vector<fs::path> candidates;
  const std::string file = arg + ".json";
  candidates.push_back(file);
  candidates.push_back(fs::path("scenarios") / file);
  for (const fs::path& base : {g_exe_dir, g_exe_dir / "..", g_exe_dir / ".." / ".."}) {
    candidates.push_back(base / "scenarios" / file);
  }
  for (const fs::path& c : candidates) {
    if (fs::exists(c) && fs::is_regular_file(c)) return c;
  }
  throw bearpose::ScenarioError("scenario not found: " + arg);
}

void write_json(const std::optional<std::string>& path, const json& doc) {
  if (!path) return;
  std::ofstream out(*path);
  if (!out) throw std::runtime_error("cannot write " + *path);
  out << doc.dump(2) << "\n";
}

struct Overrides {
  std::optional<double> step;
  std::optional<double> horizon;
  std::optional<double> k_r;
  std::optional<double> k_p;
  std::optional<int> stride;
};

bearpose::ScenarioConfig load_with_overrides(const std::string& scenario, const Overrides& ovr) {
  bearpose::ScenarioConfig cfg =
      bearpose::load_scenario_file(resolve_scenario(scenario).string());
  if (ovr.step) {
    if (!(*ovr.step > 0.0)) throw bearpose::ScenarioError("--step must be positive");
    cfg.step = *ovr.step;
  }
  if (ovr.horizon) {
    if (!(*ovr.horizon > 0.0)) throw bearpose::ScenarioError("--horizon must be positive");
    cfg.horizon = *ovr.horizon;
  }
  if (ovr.k_r) {
    if (!(*ovr.k_r > 0.0)) throw bearpose::ScenarioError("--k-r must be positive");
    cfg.gains.k_r = *ovr.k_r;
  }
  if (ovr.k_p) {
    if (!(*ovr.k_p > 0.0)) throw bearpose::ScenarioError("--k-p must be positive");
    cfg.gains.k_p = *ovr.k_p;
  }
  if (ovr.stride) {
    if (*ovr.stride < 1) throw bearpose::ScenarioError("--stride must be >= 1");
    cfg.sample_stride = *ovr.stride;
  }
  return cfg;
}

int cmd_validate(const std::string& scenario, const std::optional<std::string>& json_path) {
  bearpose::ScenarioConfig cfg;
  json doc;
  doc["scenario"] = scenario;
  try {
    cfg = load_with_overrides(scenario, {});
  } catch (const std::exception& e) {
    std::cout << "validation: FAIL\n  " << e.what() << "\n";
    doc["valid"] = false;
    doc["error"] = e.what();
    write_json(json_path, doc);
    return 1;
  }

  // load_scenario already rejects invalid topologies; report the clauses.
  const bearpose::ValidationResult check =
      bearpose::validate_topology(cfg.topology, cfg.positions);
  doc["valid"] = check.ok;
  std::cout << "validation: " << (check.ok ? "PASS" : "FAIL") << "\n";
  std::cout << "  agents: " << cfg.agent_count << " (2 leaders, "
            << cfg.topology.follower_count() << " followers)\n";

  const bearpose::SpectralReport report =
      bearpose::spectral_report(cfg.topology, cfg.positions);
  json spectra = json::object();
  for (const bearpose::SpectralEntry& e : report.followers) {
    std::printf("  agent %d: M eigenvalues {%.6g, %.6g, %.6g}  Q eigenvalues {%.6g, %.6g, %.6g}"
                "  distinct=%s  lambda_min_Q=%.6g\n",
                e.agent, e.m_eigenvalues[0], e.m_eigenvalues[1], e.m_eigenvalues[2],
                e.q_eigenvalues[0], e.q_eigenvalues[1], e.q_eigenvalues[2],
                e.distinct ? "yes" : "no", e.lambda_min_q);
    spectra[std::to_string(e.agent)] = {{"m_eigenvalues", e.m_eigenvalues},
                                        {"q_eigenvalues", e.q_eigenvalues},
                                        {"distinct", e.distinct},
                                        {"lambda_min_q", e.lambda_min_q}};
  }
  doc["spectra"] = spectra;
  write_json(json_path, doc);
  return check.ok ? 0 : 1;
}

int cmd_run(const std::string& scenario, const Overrides& ovr, const std::string& out_dir) {
  const bearpose::ScenarioConfig cfg = load_with_overrides(scenario, ovr);
  const bearpose::TimeSeries series = bearpose::run(cfg);
  const bearpose::RunSummary summary = bearpose::summarize(cfg, series);

  fs::create_directories(out_dir);
  const fs::path csv_path = fs::path(out_dir) / (cfg.name + ".csv");
  const fs::path json_path = fs::path(out_dir) / (cfg.name + "_summary.json");
  bearpose::export_csv(series, csv_path.string());
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("cannot write " + json_path.string());
  out << bearpose::to_json(summary).dump(2) << "\n";

  std::printf("run: %s  (h=%g, T=%g, %zu samples)\n", cfg.name.c_str(), cfg.step, cfg.horizon,
              series.sample_count());
  std::printf("  final avg attitude error   |Rtilde|_I : %.6e\n", summary.final_rot_err_avg);
  std::printf("  final avg position error   ||ptilde|| : %.6e\n", summary.final_pos_err_avg);
  std::printf("  final avg estimate error  ||p - phat||: %.6e\n",
              summary.final_pos_est_err_avg);
  std::printf("  converged (tol %.0e): %s\n", summary.tolerance,
              summary.all_converged ? "all followers" : "NOT all followers");
  std::printf("  artifacts: %s, %s\n", csv_path.string().c_str(), json_path.string().c_str());
  return 0;
}

int cmd_equilibria(const std::string& scenario, const Overrides& ovr,
                   const std::optional<std::string>& json_path) {
  const bearpose::ScenarioConfig cfg = load_with_overrides(scenario, ovr);
  json doc;
  doc["scenario"] = cfg.name;
  json agents = json::object();
  bool verdicts_ok = true;

  for (bearpose::AgentId i = 3; i <= cfg.agent_count; ++i) {
    const bearpose::Mat3 m = bearpose::bearing_matrix(i, cfg.topology, cfg.positions);
    json entry;
    try {
      const bearpose::EquilibriumSet set = bearpose::enumerate_equilibria(i, m);
      std::printf("agent %d: %zu equilibria\n", i, set.points.size());
      json points = json::array();
      for (std::size_t k = 0; k < set.points.size(); ++k) {
        const auto eig = bearpose::linearize_unforced(m, set.points[k], cfg.gains.k_r);
        const bool is_identity = k == 0;
        const bool stable = eig[2] < 0.0;
        const bool unstable = eig[2] > 1e-6;
        const bool verdict_ok = is_identity ? stable : unstable;
        verdicts_ok = verdicts_ok && verdict_ok;
        std::printf("  %-11s residual=%.3e  eigenvalues {%+.4f, %+.4f, %+.4f}  %s\n",
                    is_identity ? "identity" : "pi-rotation", set.residuals[k], eig[0], eig[1],
                    eig[2],
                    is_identity ? (stable ? "stable (expected)" : "UNEXPECTED: not stable")
                                : (unstable ? "unstable (expected)"
                                            : "UNEXPECTED: no positive eigenvalue"));
        points.push_back({{"residual", set.residuals[k]},
                          {"eigenvalue_real_parts", eig},
                          {"expected_verdict", verdict_ok}});
      }
      entry["equilibria"] = points;
      entry["analyzed"] = true;
    } catch (const std::invalid_argument& e) {
      std::printf("agent %d: precondition failed (%s)\n", i, e.what());
      entry["analyzed"] = false;
      entry["precondition_error"] = e.what();
    }
    agents[std::to_string(i)] = entry;
  }
  doc["agents"] = agents;
  doc["verdicts_ok"] = verdicts_ok;
  write_json(json_path, doc);
  return verdicts_ok ? 0 : 1;
}

int cmd_sweep(const std::string& scenario, const Overrides& ovr, int trials,
              std::optional<std::uint64_t> seed, std::optional<double> box,
              const std::optional<std::string>& json_path) {
  bearpose::ScenarioConfig cfg = load_with_overrides(scenario, ovr);
  if (box) {
    if (!(*box > 0.0)) throw bearpose::ScenarioError("--box must be positive");
    cfg.sweep_box_half_extent = *box;
  }
  const std::uint64_t effective_seed = seed.value_or(cfg.seed);
  const bearpose::SweepSummary summary = bearpose::basin_sweep(cfg, trials, effective_seed);
  std::printf("sweep: %d trials, seed %llu, box half-extent %g m\n", summary.trials,
              static_cast<unsigned long long>(summary.seed), summary.box_half_extent);
  std::printf("  converged: %d/%d (tolerance %.0e at T=%g)\n", summary.converged,
              summary.trials, summary.tolerance, cfg.horizon);
  if (!summary.failed_trials.empty()) {
    std::printf("  failed trials:");
    for (int k : summary.failed_trials) std::printf(" %d", k);
    std::printf("\n");
  }
  write_json(json_path, bearpose::to_json(summary));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  g_exe_dir = fs::weakly_canonical(fs::path(argv[0])).parent_path();

  CLI::App app{"Bearing-based distributed pose estimation simulator"};
  app.require_subcommand(1);

  std::string scenario;
  Overrides ovr;
  std::optional<std::string> json_path;
  std::string out_dir = "out";
  int trials = 100;
  std::optional<std::uint64_t> seed;
  std::optional<double> box;

  auto add_common = [&](CLI::App* cmd, bool with_overrides) {
    cmd->add_option("scenario", scenario, "Scenario file or bare name")->required();
    if (with_overrides) {
      cmd->add_option("--step", ovr.step, "Integrator step override [s]");
      cmd->add_option("--horizon", ovr.horizon, "Horizon override [s]");
      cmd->add_option("--k-r", ovr.k_r, "Attitude gain override");
      cmd->add_option("--k-p", ovr.k_p, "Position gain override");
      cmd->add_option("--stride", ovr.stride, "Sample stride override");
    }
    cmd->add_option("--json", json_path, "Mirror the report to this JSON file");
  };

  CLI::App* validate = app.add_subcommand("validate", "Check a scenario and report spectra");
  add_common(validate, false);

  CLI::App* run_cmd = app.add_subcommand("run", "Simulate and write CSV + summary");
  add_common(run_cmd, true);
  run_cmd->add_option("--out", out_dir, "Output directory");

  CLI::App* equilibria = app.add_subcommand("equilibria", "Equilibrium and stability report");
  add_common(equilibria, true);

  CLI::App* sweep = app.add_subcommand("sweep", "Randomized initial-condition basin sweep");
  add_common(sweep, true);
  sweep->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "Sweep seed (default: scenario seed)");
  sweep->add_option("--box", box, "Half-extent of the initial position box [m]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) return cmd_validate(scenario, json_path);
    if (app.got_subcommand(run_cmd)) return cmd_run(scenario, ovr, out_dir);
    if (app.got_subcommand(equilibria)) return cmd_equilibria(scenario, ovr, json_path);
    if (app.got_subcommand(sweep)) {
      return cmd_sweep(scenario, ovr, trials, seed, box, json_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
