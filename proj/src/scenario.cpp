#include "bearpose/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace bearpose {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw ScenarioError(path + ": " + why);
}

const json& field(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object()) bad(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) bad(path + "." + key, "missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<int>();
}

Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) bad(path, "expected an array of 3 numbers");
  return Vec3(number(v[0], path + "[0]"), number(v[1], path + "[1]"),
              number(v[2], path + "[2]"));
}

std::vector<OmegaTerm> terms(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array of terms");
  std::vector<OmegaTerm> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string tp = path + "[" + std::to_string(k) + "]";
    const json& t = v[k];
    OmegaTerm term;
    const std::string kind = field(t, tp, "type").is_string()
                                 ? t.at("type").get<std::string>()
                                 : (bad(tp + ".type", "expected a string"), "");
    if (kind == "const") {
      term.kind = OmegaTerm::Kind::constant;
    } else if (kind == "sin") {
      term.kind = OmegaTerm::Kind::sine;
    } else if (kind == "cos") {
      term.kind = OmegaTerm::Kind::cosine;
    } else {
      bad(tp + ".type", "expected one of 'const', 'sin', 'cos'");
    }
    term.amplitude = number(field(t, tp, "amplitude"), tp + ".amplitude");
    if (!std::isfinite(term.amplitude)) bad(tp + ".amplitude", "must be finite");
    if (term.kind != OmegaTerm::Kind::constant) {
      term.frequency = number(field(t, tp, "frequency"), tp + ".frequency");
      if (!std::isfinite(term.frequency)) bad(tp + ".frequency", "must be finite");
    }
    out.push_back(term);
  }
  return out;
}

std::string id_key(AgentId i) { return std::to_string(i); }

}  // namespace

ScenarioConfig load_scenario(const json& doc) {
  ScenarioConfig cfg;
  if (!doc.is_object()) bad("document", "expected a JSON object");

  cfg.name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>()
                                                             : std::string("unnamed");
  cfg.agent_count = integer(field(doc, "document", "agents"), "agents");
  if (cfg.agent_count < 3) bad("agents", "need at least 3 agents (two leaders plus followers)");
  const int n = cfg.agent_count;

  cfg.positions.assign(n + 1, Vec3::Zero());
  const json& pos = field(doc, "document", "positions");
  for (AgentId i = 1; i <= n; ++i) {
    cfg.positions[i] = vec3(field(pos, "positions", id_key(i)), "positions." + id_key(i));
  }

  cfg.omega.assign(n + 1, OmegaSignal{});
  const json& omega = field(doc, "document", "angular_velocity");
  const char* axis_names[3] = {"x", "y", "z"};
  for (AgentId i = 1; i <= n; ++i) {
    const std::string apath = "angular_velocity." + id_key(i);
    const json& sig = field(omega, "angular_velocity", id_key(i));
    for (int a = 0; a < 3; ++a) {
      if (sig.contains(axis_names[a])) {
        cfg.omega[i].axis[a] = terms(sig[axis_names[a]], apath + "." + axis_names[a]);
      }
    }
  }

  cfg.topology.agent_count = n;
  cfg.topology.neighbors.assign(n + 1, {});
  cfg.topology.edge_gains.assign(n + 1, {});
  const json& edges = field(doc, "document", "edges");
  if (!edges.is_array()) bad("edges", "expected an array");
  std::set<std::pair<AgentId, AgentId>> seen;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string ep = "edges[" + std::to_string(k) + "]";
    const json& e = edges[k];
    const AgentId i = integer(field(e, ep, "agent"), ep + ".agent");
    const AgentId j = integer(field(e, ep, "neighbor"), ep + ".neighbor");
    const double gain = number(field(e, ep, "gain"), ep + ".gain");
    if (i < 1 || i > n) bad(ep + ".agent", "out of range");
    if (j < 1 || j > n) bad(ep + ".neighbor", "out of range");
    if (!(gain > 0.0) || !std::isfinite(gain)) bad(ep + ".gain", "must be positive");
    if (!seen.insert({i, j}).second) bad(ep, "duplicate edge");
    cfg.topology.neighbors[i].push_back(j);
    cfg.topology.edge_gains[i].push_back(gain);
  }

  const json& gains = field(doc, "document", "gains");
  cfg.gains.k_r = number(field(gains, "gains", "k_R"), "gains.k_R");
  cfg.gains.k_p = number(field(gains, "gains", "k_p"), "gains.k_p");
  if (!(cfg.gains.k_r > 0.0)) bad("gains.k_R", "must be positive");
  if (!(cfg.gains.k_p > 0.0)) bad("gains.k_p", "must be positive");

  cfg.initial_estimates.assign(n + 1, InitialEstimate{});
  const json& init = field(doc, "document", "initial_estimates");
  for (AgentId l : Topology::kLeaders) {
    if (init.contains(id_key(l))) {
      bad("initial_estimates." + id_key(l), "leaders carry their true pose, not an estimate");
    }
  }
  for (AgentId i = 3; i <= n; ++i) {
    const std::string ip = "initial_estimates." + id_key(i);
    const json& entry = field(init, "initial_estimates", id_key(i));
    InitialEstimate est;
    est.attitude_angle = number(field(entry, ip, "attitude_angle"), ip + ".attitude_angle");
    est.attitude_axis = vec3(field(entry, ip, "attitude_axis"), ip + ".attitude_axis");
    const double axis_norm = est.attitude_axis.norm();
    if (!(axis_norm > 0.0)) bad(ip + ".attitude_axis", "must be nonzero");
    est.attitude_axis /= axis_norm;
    est.position = vec3(field(entry, ip, "position"), ip + ".position");
    cfg.initial_estimates[i] = est;
  }

  const json& integ = field(doc, "document", "integration");
  cfg.step = number(field(integ, "integration", "step"), "integration.step");
  cfg.horizon = number(field(integ, "integration", "horizon"), "integration.horizon");
  cfg.sample_stride = integer(field(integ, "integration", "sample_stride"),
                              "integration.sample_stride");
  if (!(cfg.step > 0.0)) bad("integration.step", "must be positive");
  if (!(cfg.horizon > 0.0)) bad("integration.horizon", "must be positive");
  if (cfg.sample_stride < 1) bad("integration.sample_stride", "must be >= 1");

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) {
      bad("seed", "expected a non-negative integer");
    }
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("sweep")) {
    const json& sweep = doc["sweep"];
    if (sweep.contains("box_half_extent")) {
      cfg.sweep_box_half_extent = number(sweep["box_half_extent"], "sweep.box_half_extent");
      if (!(cfg.sweep_box_half_extent > 0.0)) bad("sweep.box_half_extent", "must be positive");
    }
  }

  const ValidationResult check = validate_topology(cfg.topology, cfg.positions);
  if (!check.ok) throw ScenarioError("topology: " + check.message);
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ScenarioError("parse error in " + path + ": " + e.what());
  }
  return load_scenario(doc);
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  json doc;
  doc["name"] = cfg.name;
  doc["agents"] = cfg.agent_count;

  json pos = json::object();
  for (AgentId i = 1; i <= cfg.agent_count; ++i) {
    pos[std::to_string(i)] = {cfg.positions[i].x(), cfg.positions[i].y(), cfg.positions[i].z()};
  }
  doc["positions"] = pos;

  const char* axis_names[3] = {"x", "y", "z"};
  json omega = json::object();
  for (AgentId i = 1; i <= cfg.agent_count; ++i) {
    json sig = json::object();
    for (int a = 0; a < 3; ++a) {
      if (cfg.omega[i].axis[a].empty()) continue;
      json arr = json::array();
      for (const OmegaTerm& t : cfg.omega[i].axis[a]) {
        json jt;
        jt["type"] = t.kind == OmegaTerm::Kind::constant
                         ? "const"
                         : (t.kind == OmegaTerm::Kind::sine ? "sin" : "cos");
        jt["amplitude"] = t.amplitude;
        if (t.kind != OmegaTerm::Kind::constant) jt["frequency"] = t.frequency;
        arr.push_back(jt);
      }
      sig[axis_names[a]] = arr;
    }
    omega[std::to_string(i)] = sig;
  }
  doc["angular_velocity"] = omega;

  json edges = json::array();
  for (AgentId i = 1; i <= cfg.agent_count; ++i) {
    for (std::size_t k = 0; k < cfg.topology.neighbors[i].size(); ++k) {
      json e;
      e["agent"] = i;
      e["neighbor"] = cfg.topology.neighbors[i][k];
      e["gain"] = cfg.topology.edge_gains[i][k];
      edges.push_back(e);
    }
  }
  doc["edges"] = edges;

  doc["gains"] = {{"k_R", cfg.gains.k_r}, {"k_p", cfg.gains.k_p}};

  json init = json::object();
  for (AgentId i = 3; i <= cfg.agent_count; ++i) {
    const InitialEstimate& est = cfg.initial_estimates[i];
    json e;
    e["attitude_angle"] = est.attitude_angle;
    e["attitude_axis"] = {est.attitude_axis.x(), est.attitude_axis.y(), est.attitude_axis.z()};
    e["position"] = {est.position.x(), est.position.y(), est.position.z()};
    init[std::to_string(i)] = e;
  }
  doc["initial_estimates"] = init;

  doc["integration"] = {{"step", cfg.step},
                        {"horizon", cfg.horizon},
                        {"sample_stride", cfg.sample_stride}};
  doc["seed"] = cfg.seed;
  doc["sweep"] = {{"box_half_extent", cfg.sweep_box_half_extent}};
  return doc;
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  const std::string canonical = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace bearpose
