#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bearpose/network.hpp"
#include "bearpose/observers.hpp"
#include "bearpose/world.hpp"

namespace bearpose {

struct InitialEstimate {
  double attitude_angle = 0.0;
  Vec3 attitude_axis = Vec3::UnitX();
  Vec3 position = Vec3::Zero();
};

/// A fully specified simulation scenario. Leaders never carry initial
/// estimates: their entries are forced to the true pose.
struct ScenarioConfig {
  std::string name;
  int agent_count = 0;
  Positions positions;                         // 1-based
  std::vector<OmegaSignal> omega;              // 1-based
  Topology topology;
  Gains gains;
  std::vector<InitialEstimate> initial_estimates;  // 1-based; entries 1, 2 unused
  double step = 1e-3;
  double horizon = 30.0;
  int sample_stride = 10;
  std::uint64_t seed = 0;
  double sweep_box_half_extent = 5.0;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses and validates a scenario document. The first structural problem is
/// reported with the offending field path; semantic problems (bad topology,
/// non-positive gains) use the validation machinery.
ScenarioConfig load_scenario(const nlohmann::json& document);
ScenarioConfig load_scenario_file(const std::string& path);

nlohmann::json to_json(const ScenarioConfig& config);

/// FNV-1a hash of the canonical serialization; stable across reloads of the
/// same effective configuration.
std::uint64_t config_hash(const ScenarioConfig& config);

}  // namespace bearpose
