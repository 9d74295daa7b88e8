"""Bearing-based distributed pose estimation on SO(3).

Thin re-export of the compiled core module.
"""

from bearpose._core import (
    DivergenceError,
    __version__,
    ScenarioConfig,
    ScenarioError,
    TimeSeries,
    angle_axis,
    antisymmetric_part,
    basin_sweep,
    bearing_matrix,
    csv_string,
    enumerate_equilibria,
    exp_so3,
    linearize_unforced,
    load_scenario,
    load_scenario_file,
    orthogonal_projector,
    project_to_rotation,
    psi,
    rotation_distance,
    run,
    simulate_error_dynamics,
    skew,
    stiffness_matrix,
    summarize,
    symmetric_eigenvalues,
    validate_topology,
    vex,
)

__all__ = [
    "DivergenceError",
    "ScenarioConfig",
    "ScenarioError",
    "TimeSeries",
    "angle_axis",
    "antisymmetric_part",
    "basin_sweep",
    "bearing_matrix",
    "csv_string",
    "enumerate_equilibria",
    "exp_so3",
    "linearize_unforced",
    "load_scenario",
    "load_scenario_file",
    "orthogonal_projector",
    "project_to_rotation",
    "psi",
    "rotation_distance",
    "run",
    "simulate_error_dynamics",
    "skew",
    "stiffness_matrix",
    "summarize",
    "symmetric_eigenvalues",
    "validate_topology",
    "vex",
]
