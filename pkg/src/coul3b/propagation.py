"""Feedback-controlled unitary propagation in the truncated eigenbasis.

The controlled evolution i d/dt psi = (H - eps(t) H1) psi is integrated with
the exact per-step exponential of the K x K generator diag(E) - eps B, eps
held constant across each step.  The field follows the feedback law
    eps = -alpha * Im{ <psi, target> <target, B psi> },
which makes the target population M(t) = |<target|psi>|^2 non-decreasing in
the continuous-time limit.

A pure eigenstate with a real symmetric B is an exact dark state of this law
(eps = 0 forever), so a run that starts with identically zero feedback applies
a single weak constant-field kick to seed relative phases; the kick is
recorded in the trace like any other field value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .control_ops import ControlOperator, ProjectedOperator, project
from .errors import MissingTargetError, SolverError
from .spectrum import EigenSolution

DARK_STATE_EPS = 1e-14


@dataclass(frozen=True)
class ControlConfig:
    """Parameters of one feedback-control run."""

    dt: float = 0.05
    n_steps: int = 100
    alpha: float = 100.0
    target: int | None = None
    K: int | None = None        # eigenbasis truncation; None keeps all retained states
    operator: str = "magnetic"
    kick: float = 0.1           # one-step constant field applied if feedback starts dead
    substeps: int = 1           # exponential sub-steps per feedback update

    def __post_init__(self):
        if not self.dt >= 0:
            raise ValueError(f"dt must be nonnegative, got {self.dt}")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be nonnegative, got {self.n_steps}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.substeps < 1:
            raise ValueError(f"substeps must be at least 1, got {self.substeps}")


@dataclass(frozen=True)
class TraceRecord:
    step: int
    time: float
    overlap: float
    lyapunov: float
    epsilon: float


@dataclass(frozen=True)
class ControlTrace:
    """Per-step overlap/field history plus the final state."""

    records: list[TraceRecord]
    final_amplitudes: np.ndarray
    final_state_grid: np.ndarray
    target: int
    config: ControlConfig = field(repr=False, default=None)

    @property
    def final_overlap(self) -> float:
        return self.records[-1].overlap


def lyapunov_value(psi: np.ndarray, target: int) -> float:
    """Target population M = |<target|psi>|^2, in [0, 1] for normalized psi."""
    return float(abs(psi[target]) ** 2)


def epsilon_feedback(
    psi: np.ndarray, target: int, B: ProjectedOperator, alpha: float
) -> float:
    """Feedback field -alpha * Im{ <psi, target> <target, B psi> }."""
    bpsi_t = B.matrix[target] @ psi
    return float(-alpha * np.imag(np.conj(psi[target]) * bpsi_t))


def step(
    psi: np.ndarray,
    energies: np.ndarray,
    B: ProjectedOperator,
    epsilon: float,
    dt: float,
) -> np.ndarray:
    """One exact exponential step exp(-i dt (diag(E) - eps B)) psi."""
    psi = np.asarray(psi, dtype=complex)
    if epsilon == 0.0:
        return psi * np.exp(-1j * dt * energies)
    gen = np.diag(energies).astype(float) - epsilon * B.matrix
    try:
        lam, Q = sla.eigh(gen)
    except sla.LinAlgError as exc:  # pragma: no cover - Hermitian eigh is robust
        raise SolverError(f"step generator decomposition failed: {exc}") from exc
    return Q @ (np.exp(-1j * dt * lam) * (np.conj(Q).T @ psi))


def run_control(
    config: ControlConfig, solution: EigenSolution, op: ControlOperator
) -> ControlTrace:
    """Drive the ground state toward the target, recording the full trace.

    The state starts as the ground eigenvector; each iteration evaluates the
    feedback at the step start and applies one exact exponential step.  The
    trace holds n_steps + 1 records; the epsilon column of record k is the
    field applied during the step leaving it (0 for the last record).
    """
    if config.target is None:
        raise MissingTargetError("control run has no target state index")
    K = config.K if config.K is not None else solution.count
    if not 1 <= K <= solution.count:
        raise ValueError(f"truncation K={K} outside 1..{solution.count}")
    if not 0 <= config.target < K:
        raise ValueError(f"target {config.target} outside truncated basis of size {K}")

    basis = solution.truncated(K)
    B = project(op, basis)
    energies = basis.energies
    target = config.target

    psi = np.zeros(K, dtype=complex)
    psi[0] = 1.0
    kicked = False
    records = []
    for k in range(config.n_steps):
        eps = epsilon_feedback(psi, target, B, config.alpha)
        if abs(eps) < DARK_STATE_EPS and not kicked:
            # exact dark state: free evolution cannot leave it, seed with one kick
            eps = config.kick
            kicked = True
        overlap = abs(psi[target])
        records.append(
            TraceRecord(
                step=k, time=k * config.dt, overlap=float(overlap),
                lyapunov=lyapunov_value(psi, target), epsilon=float(eps),
            )
        )
        for _ in range(config.substeps):
            psi = step(psi, energies, B, eps, config.dt / config.substeps)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-10:
            raise SolverError(
                f"propagation lost unitarity at step {k}: |psi| = {norm!r}"
            )
    records.append(
        TraceRecord(
            step=config.n_steps, time=config.n_steps * config.dt,
            overlap=float(abs(psi[target])), lyapunov=lyapunov_value(psi, target),
            epsilon=0.0,
        )
    )
    final_grid = basis.states @ psi
    return ControlTrace(
        records=records, final_amplitudes=psi, final_state_grid=final_grid,
        target=target, config=config,
    )


def write_trace_csv(trace: ControlTrace, path) -> None:
    with open(path, "w") as fh:
        fh.write("step,time,overlap,M,epsilon\n")
        for r in trace.records:
            fh.write(
                f"{r.step},{r.time:.17g},{r.overlap:.17g},"
                f"{r.lyapunov:.17g},{r.epsilon:.17g}\n"
            )


def write_final_state_csv(trace: ControlTrace, grid, path) -> None:
    psi2 = grid.reshape(trace.final_state_grid)
    nodes = grid.nodes
    with open(path, "w") as fh:
        fh.write("R,rho,psi_real,psi_imag\n")
        for i, R in enumerate(nodes):
            for j, rho in enumerate(nodes):
                fh.write(
                    f"{R:.17g},{rho:.17g},"
                    f"{psi2[i, j].real:.17g},{psi2[i, j].imag:.17g}\n"
                )
