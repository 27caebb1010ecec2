"""Spectral solver and quantum-control toolkit for the confined three-body
Coulomb system reduced to its two radial coordinates."""

from .model import PhysicalParams, attractive_boundary, potential, potential_3d
from .discretization import (
    GridSpec,
    HamiltonianMatrix,
    MeasureWeights,
    RadialGrid,
    assemble_hamiltonian,
    build_grid,
    export_matrix_coo,
    inner_product,
    radial_kinetic_1d,
)
from .spectrum import (
    Classification,
    EigenSolution,
    StateReport,
    cache_key,
    classify,
    i2_collision,
    load_cached_solution,
    psi00_proxy,
    save_cached_solution,
    solve_spectrum,
    write_spectrum_csv,
    write_wavefunction_csv,
)
from .control_ops import (
    ControlOperator,
    ProjectedOperator,
    diamagnetic_operator,
    dipole_operator,
    magnetic_control_operator,
    project,
    reference_states,
    transitivity_scan,
    write_scan_csv,
)
from .propagation import (
    ControlConfig,
    ControlTrace,
    epsilon_feedback,
    lyapunov_value,
    run_control,
    step,
    write_final_state_csv,
    write_trace_csv,
)
from .errors import ConfigError, MissingTargetError, SolverError

__version__ = "0.1.0"

__all__ = [
    "PhysicalParams", "potential", "potential_3d", "attractive_boundary",
    "GridSpec", "MeasureWeights", "RadialGrid", "HamiltonianMatrix",
    "build_grid", "radial_kinetic_1d", "assemble_hamiltonian", "inner_product",
    "export_matrix_coo",
    "EigenSolution", "StateReport", "Classification", "solve_spectrum",
    "psi00_proxy", "i2_collision", "classify", "cache_key",
    "save_cached_solution", "load_cached_solution",
    "write_spectrum_csv", "write_wavefunction_csv",
    "ControlOperator", "ProjectedOperator", "dipole_operator",
    "diamagnetic_operator", "magnetic_control_operator", "project",
    "transitivity_scan", "reference_states", "write_scan_csv",
    "ControlConfig", "ControlTrace", "lyapunov_value", "epsilon_feedback",
    "step", "run_control", "write_trace_csv", "write_final_state_csv",
    "ConfigError", "SolverError", "MissingTargetError",
    "__version__",
]
