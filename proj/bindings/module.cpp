// Python bindings for the core operations: geometry primitives, topology
// validation and spectra, scenario loading, simulation runs, the error
// dynamics integrator and the basin sweep.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bearpose/analysis.hpp"
#include "bearpose/sim.hpp"

namespace py = pybind11;
using namespace bearpose;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      py::dict d;
      for (auto it = j.begin(); it != j.end(); ++it) {
        d[py::str(it.key())] = json_to_py(it.value());
      }
      return d;
    }
    case nlohmann::json::value_t::array: {
      py::list l;
      for (const auto& v : j) l.append(json_to_py(v));
      return l;
    }
    case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
    default: return py::none();
  }
}

Topology topology_from(int agent_count,
                       const std::vector<std::tuple<int, int, double>>& edges) {
  Topology t;
  t.agent_count = agent_count;
  t.neighbors.assign(agent_count + 1, {});
  t.edge_gains.assign(agent_count + 1, {});
  for (const auto& [i, j, gain] : edges) {
    t.neighbors.at(i).push_back(j);
    t.edge_gains.at(i).push_back(gain);
  }
  return t;
}

Positions positions_from(const std::vector<Vec3>& pts) {
  Positions p(pts.size() + 1, Vec3::Zero());
  for (std::size_t k = 0; k < pts.size(); ++k) p[k + 1] = pts[k];
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bearing-based distributed pose estimation on SO(3)";
  m.attr("__version__") = "0.1.0";

  // ---- geometry -------------------------------------------------------
  m.def("skew", &skew, py::arg("v"));
  m.def("vex", &vex, py::arg("s"));
  m.def("antisymmetric_part", &antisymmetric_part, py::arg("a"));
  m.def("psi", &psi, py::arg("c"));
  m.def(
      "rotation_distance",
      [](const Mat3& r) { return rotation_distance(RotationMatrix::from_matrix(r)); },
      py::arg("rotation"));
  m.def(
      "angle_axis",
      [](double angle, const Vec3& axis) { return angle_axis(angle, axis).matrix(); },
      py::arg("angle"), py::arg("axis"));
  m.def(
      "exp_so3", [](const Vec3& w) { return exp_so3(w).matrix(); }, py::arg("w"));
  m.def("orthogonal_projector", &orthogonal_projector, py::arg("x"));
  m.def(
      "project_to_rotation", [](const Mat3& v) { return project_to_rotation(v).matrix(); },
      py::arg("m"));

  // ---- network --------------------------------------------------------
  m.def(
      "validate_topology",
      [](int agents, const std::vector<std::tuple<int, int, double>>& edges,
         const std::vector<Vec3>& positions) {
        const Topology t = topology_from(agents, edges);
        const ValidationResult r = validate_topology(t, positions_from(positions));
        py::dict d;
        d["ok"] = r.ok;
        d["defect"] = std::string(to_string(r.defect));
        d["agents"] = r.agents;
        d["message"] = r.message;
        return d;
      },
      py::arg("agents"), py::arg("edges"), py::arg("positions"),
      "Validate an edge list [(agent, neighbor, gain), ...] against positions "
      "listed for agents 1..n.");
  m.def(
      "bearing_matrix",
      [](int i, int agents, const std::vector<std::tuple<int, int, double>>& edges,
         const std::vector<Vec3>& positions) {
        return bearing_matrix(i, topology_from(agents, edges), positions_from(positions));
      },
      py::arg("i"), py::arg("agents"), py::arg("edges"), py::arg("positions"));
  m.def(
      "stiffness_matrix",
      [](int i, int agents, const std::vector<std::tuple<int, int, double>>& edges,
         const std::vector<Vec3>& positions) {
        return stiffness_matrix(i, topology_from(agents, edges), positions_from(positions));
      },
      py::arg("i"), py::arg("agents"), py::arg("edges"), py::arg("positions"));
  m.def("symmetric_eigenvalues", &symmetric_eigenvalues, py::arg("a"));

  // ---- scenario + simulation ------------------------------------------
  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readonly("name", &ScenarioConfig::name)
      .def_readonly("agent_count", &ScenarioConfig::agent_count)
      .def_readwrite("step", &ScenarioConfig::step)
      .def_readwrite("horizon", &ScenarioConfig::horizon)
      .def_readwrite("sample_stride", &ScenarioConfig::sample_stride)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def("__repr__", [](const ScenarioConfig& c) {
        return "<ScenarioConfig '" + c.name + "', " + std::to_string(c.agent_count) +
               " agents>";
      });

  py::class_<TimeSeries>(m, "TimeSeries")
      .def_readonly("followers", &TimeSeries::followers)
      .def_readonly("t", &TimeSeries::t)
      .def_readonly("rot_err", &TimeSeries::rot_err)
      .def_readonly("pos_err", &TimeSeries::pos_err)
      .def_readonly("pos_est_err", &TimeSeries::pos_est_err)
      .def_readonly("rot_err_avg", &TimeSeries::rot_err_avg)
      .def_readonly("pos_err_avg", &TimeSeries::pos_err_avg)
      .def_readonly("pos_est_err_avg", &TimeSeries::pos_est_err_avg)
      .def("sample_count", &TimeSeries::sample_count);

  m.def("load_scenario_file", &load_scenario_file, py::arg("path"));
  m.def(
      "load_scenario",
      [](const std::string& text) { return load_scenario(nlohmann::json::parse(text)); },
      py::arg("json_text"));
  m.def("run", [](const ScenarioConfig& cfg) { return run(cfg); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("csv_string", &csv_string, py::arg("series"));
  m.def(
      "summarize",
      [](const ScenarioConfig& cfg, const TimeSeries& series, double tol) {
        return json_to_py(to_json(summarize(cfg, series, tol)));
      },
      py::arg("config"), py::arg("series"), py::arg("tolerance") = 1e-3);
  m.def(
      "basin_sweep",
      [](const ScenarioConfig& cfg, int trials, std::uint64_t seed) {
        SweepSummary summary;
        {
          py::gil_scoped_release release;
          summary = basin_sweep(cfg, trials, seed);
        }
        return json_to_py(to_json(summary));
      },
      py::arg("config"), py::arg("trials"), py::arg("seed"));

  // ---- analysis --------------------------------------------------------
  m.def(
      "enumerate_equilibria",
      [](int agent, const Mat3& m_matrix) {
        const EquilibriumSet set = enumerate_equilibria(agent, m_matrix);
        std::vector<Mat3> points;
        for (const RotationMatrix& p : set.points) points.push_back(p.matrix());
        return py::make_tuple(points, set.residuals);
      },
      py::arg("agent"), py::arg("m_matrix"),
      "Returns (equilibrium rotations, field residuals).");
  m.def(
      "linearize_unforced",
      [](const Mat3& m_matrix, const Mat3& at, double k_r) {
        return linearize_unforced(m_matrix, RotationMatrix::from_matrix(at), k_r);
      },
      py::arg("m_matrix"), py::arg("at"), py::arg("k_r"));
  m.def(
      "simulate_error_dynamics",
      [](const ScenarioConfig& cfg, double horizon, double h) {
        return simulate_error_dynamics(cfg, horizon, h);
      },
      py::arg("config"), py::arg("horizon"), py::arg("h"),
      py::call_guard<py::gil_scoped_release>());

  py::register_exception<ScenarioError>(m, "ScenarioError");
  py::register_exception<DivergenceError>(m, "DivergenceError");
}
