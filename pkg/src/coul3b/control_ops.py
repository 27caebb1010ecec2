"""Control operators as diagonal grid multipliers, and the transitivity scan.

Two couplings are available: the angle-averaged electric-dipole multiplier
    d(R, rho) = ((R + rho)^3 - |R - rho|^3) / (16 R rho)
and the quadratic magnetic (diamagnetic) multiplier c_rho rho^2 + c_R Z mu R^2.
The combined magnetic control operator is the dipole multiplier plus rho^2.

Transitivity between two eigenstates is probed by renormalized powers of the
projected operator: t_n = |<target| B^n |source>| / ||B^n |source>||, which
vanishes exactly when the raw matrix element of the n-th power does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import RadialGrid
from .model import PhysicalParams
from .spectrum import EigenSolution

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class ControlOperator:
    """Diagonal multiplier on the grid, tagged by its physical kind."""

    kind: str
    diag: np.ndarray
    grid: RadialGrid
    c_rho: float | None = None
    c_R: float | None = None


@dataclass(frozen=True)
class ProjectedOperator:
    """Real symmetric matrix of the multiplier in the retained eigenbasis."""

    matrix: np.ndarray
    kind: str
    basis: EigenSolution

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def dipole_operator(grid: RadialGrid) -> ControlOperator:
    """Angle-averaged dipole multiplier ((R+rho)^3 - |R-rho|^3)/(16 R rho)."""
    R = grid.nodes[:, None]
    rho = grid.nodes[None, :]
    diag = ((R + rho) ** 3 - np.abs(R - rho) ** 3) / (16.0 * R * rho)
    return ControlOperator(kind="dipole", diag=diag.ravel(), grid=grid)


def diamagnetic_operator(
    grid: RadialGrid, params: PhysicalParams, c_rho: float = 1.0, c_R: float = 0.0
) -> ControlOperator:
    """Quadratic magnetic multiplier c_rho rho^2 + c_R Z mu R^2."""
    if c_rho < 0 or c_R < 0:
        raise ValueError("diamagnetic coefficients must be nonnegative")
    R = grid.nodes[:, None]
    rho = grid.nodes[None, :]
    diag = c_rho * rho**2 + c_R * params.Z * params.mu * R**2
    diag = np.broadcast_to(diag, (len(grid.nodes), len(grid.nodes)))
    return ControlOperator(
        kind="diamagnetic", diag=np.ascontiguousarray(diag).ravel(), grid=grid,
        c_rho=c_rho, c_R=c_R,
    )


def magnetic_control_operator(grid: RadialGrid) -> ControlOperator:
    """Combined magnetic control multiplier: dipole plus rho^2."""
    rho = grid.nodes[None, :]
    diag = dipole_operator(grid).diag + np.broadcast_to(
        rho**2, (len(grid.nodes), len(grid.nodes))
    ).ravel()
    return ControlOperator(kind="magnetic", diag=diag, grid=grid)


def operator_by_kind(
    kind: str,
    grid: RadialGrid,
    params: PhysicalParams,
    c_rho: float = 1.0,
    c_R: float = 0.0,
) -> ControlOperator:
    if kind == "dipole":
        return dipole_operator(grid)
    if kind == "magnetic":
        return magnetic_control_operator(grid)
    if kind == "diamagnetic":
        return diamagnetic_operator(grid, params, c_rho=c_rho, c_R=c_R)
    raise ValueError(f"unknown control operator kind {kind!r}")


def project(op: ControlOperator, solution: EigenSolution) -> ProjectedOperator:
    """Matrix elements B_kl = <psi_k | diag | psi_l> under the grid measure."""
    if op.grid.spec != solution.grid.spec:
        raise ValueError(
            f"grid mismatch: operator on {op.grid.spec}, basis on {solution.grid.spec}"
        )
    weighted = solution.states * (op.diag * solution.grid.weights.flat)[:, None]
    B = np.conj(weighted).T @ solution.states
    B = 0.5 * (B + np.conj(B).T)
    return ProjectedOperator(matrix=B, kind=op.kind, basis=solution)


def transitivity_scan(
    B: ProjectedOperator, source: int, target: int, n_max: int
) -> np.ndarray:
    """Overlap magnitudes t_n of renormalized operator powers, n = 1..n_max."""
    K = B.size
    if not (0 <= source < K and 0 <= target < K):
        raise ValueError(f"source/target outside basis of size {K}")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    v = np.zeros(K)
    v[source] = 1.0
    out = np.zeros(n_max)
    for n in range(n_max):
        v = B.matrix @ v
        norm = np.linalg.norm(v)
        if norm == 0.0:
            break  # operator annihilated the iterate; all remaining overlaps vanish
        v /= norm
        out[n] = abs(v[target])
    return out


def reference_states(classification) -> tuple[int, int]:
    """Two lowest-index unflagged states above the ground state.

    Deterministic stand-ins for 'states with vanishing origin amplitude' in
    scan comparisons.
    """
    picks = [
        r.index
        for r in classification.reports
        if r.index > 0 and not r.is_triple_collision
    ][:2]
    if len(picks) < 2:
        raise ValueError("need at least two unflagged states above the ground state")
    return picks[0], picks[1]


def write_scan_csv(scans: dict[str, np.ndarray], path) -> None:
    """Columns n,t_target,t_ref1,t_ref2 from equally long scan arrays."""
    t_target = scans["t_target"]
    t_ref1 = scans["t_ref1"]
    t_ref2 = scans["t_ref2"]
    with open(path, "w") as fh:
        fh.write("n,t_target,t_ref1,t_ref2\n")
        for n in range(len(t_target)):
            fh.write(
                f"{n + 1},{t_target[n]:.17g},{t_ref1[n]:.17g},{t_ref2[n]:.17g}\n"
            )
