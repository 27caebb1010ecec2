"""Diagonalization, measure-normalized eigenstates, and collision diagnostics.

A "collision state" here is an eigenstate with non-vanishing amplitude at the
configuration where all three particles coincide.  On the grid that amplitude
is proxied by the average of psi over the block x block nodes nearest the
origin, compared against the state's largest nodal amplitude.
"""

from __future__ import annotations

import hashlib
import sys
import zipfile
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .discretization import HamiltonianMatrix, RadialGrid, build_grid, GridSpec
from .errors import SolverError
from .model import PhysicalParams, potential

RESIDUAL_TOL = 1e-8
DENSE_CUTOFF = 8000


@dataclass(frozen=True)
class EigenSolution:
    """Lowest eigenpairs: ascending energies, measure-orthonormal states.

    states has shape (grid size, count); column k is the k-th eigenstate in
    the psi representation, normalized to unit measure norm, with its global
    sign fixed so the entry of largest modulus is positive.
    """

    energies: np.ndarray
    states: np.ndarray
    grid: RadialGrid

    @property
    def count(self) -> int:
        return len(self.energies)

    def state(self, k: int) -> np.ndarray:
        return self.states[:, k]

    def truncated(self, k: int) -> "EigenSolution":
        """First k states, sharing storage with this solution."""
        if not 1 <= k <= self.count:
            raise ValueError(f"truncation {k} outside 1..{self.count}")
        return EigenSolution(
            energies=self.energies[:k], states=self.states[:, :k], grid=self.grid
        )


def _fix_phases(psi: np.ndarray) -> np.ndarray:
    """Make the largest-modulus entry of each column real positive."""
    idx = np.argmax(np.abs(psi), axis=0)
    lead = psi[idx, np.arange(psi.shape[1])]
    if np.iscomplexobj(psi):
        phase = np.where(np.abs(lead) > 0, lead / np.where(np.abs(lead) > 0, np.abs(lead), 1.0), 1.0)
        return psi / phase
    return psi * np.where(lead < 0, -1.0, 1.0)


def solve_spectrum(
    H: HamiltonianMatrix, count: int, dense_cutoff: int = DENSE_CUTOFF
) -> EigenSolution:
    """Lowest `count` eigenpairs of the symmetrized Hamiltonian.

    Dense symmetric decomposition up to `dense_cutoff` rows, shift-invert
    Lanczos above it.  Every returned pair is verified against the residual
    bound ||S v - E v|| < 1e-8; states are mapped back to the psi
    representation and measure-normalized.
    """
    dim = H.dimension
    if not 1 <= count <= dim:
        raise ValueError(f"count {count} outside 1..{dim}")
    S = H.matrix
    if dim <= dense_cutoff:
        energies, vecs = sla.eigh(S.toarray(), subset_by_index=[0, count - 1])
    else:
        # all eigenvalues exceed the grid-sampled potential minimum (the
        # kinetic form is PSD), so a shift below it targets the lowest pairs
        nodes = H.grid.nodes
        v_min = potential(nodes[:, None], nodes[None, :], H.params).min()
        sigma = float(v_min) - 1.0
        energies, vecs = spla.eigsh(S, k=count, sigma=sigma, which="LM")
        order = np.argsort(energies, kind="stable")
        energies, vecs = energies[order], vecs[:, order]

    resid = np.linalg.norm(S @ vecs - vecs * energies[None, :], axis=0)
    vnorm = np.linalg.norm(vecs, axis=0)
    rel = resid / vnorm
    if np.any(rel > RESIDUAL_TOL):
        worst = int(np.argmax(rel))
        raise SolverError(
            f"eigenpair residual {rel[worst]:.3e} at index {worst} exceeds "
            f"{RESIDUAL_TOL:.1e} (dim={dim}, count={count})"
        )

    # psi = v / sqrt(w): unit 2-norm of v gives unit measure norm of psi
    sqrt_w = np.sqrt(H.grid.weights.flat)
    psi = vecs / vnorm[None, :] / sqrt_w[:, None]
    return EigenSolution(energies=energies, states=_fix_phases(psi), grid=H.grid)


def psi00_proxy(state: np.ndarray, grid: RadialGrid, block: int = 2):
    """Mean of psi over the block x block nodes nearest the origin."""
    m = grid.spec.nodes_per_axis
    if not 1 <= block <= m:
        raise ValueError(f"block {block} outside 1..{m}")
    return grid.reshape(state)[:block, :block].mean()


def i2_collision(state: np.ndarray, grid: RadialGrid) -> float:
    """Heavy-pair collision weight: sum_j rho_j^2 |psi(R_1, rho_j)|^2 h.

    The innermost R column stands for psi(0, rho).
    """
    col = grid.reshape(state)[0, :]
    return float(np.sum(grid.nodes**2 * np.abs(col) ** 2) * grid.spec.h)


@dataclass(frozen=True)
class StateReport:
    """Per-state diagnostics used for collision-state classification."""

    index: int
    energy: float
    delta: float
    psi00: complex
    psi00_ratio: float
    i2: float
    is_triple_collision: bool


@dataclass(frozen=True)
class Classification:
    """Reports for every retained state plus the designated first collision state."""

    reports: list[StateReport]
    target_index: int | None
    tau: float
    block: int


def classify(solution: EigenSolution, tau: float = 0.1, block: int = 2) -> Classification:
    """Flag states whose origin-block amplitude exceeds tau of their peak amplitude.

    The designated target is the lowest-index flagged state, or None when no
    state is flagged.  Lowering tau never unflags a state.
    """
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    grid = solution.grid
    e0 = solution.energies[0]
    reports = []
    target = None
    for k in range(solution.count):
        st = solution.state(k)
        p00 = psi00_proxy(st, grid, block)
        ratio = float(abs(p00) / np.abs(st).max())
        flagged = ratio > tau
        if flagged and target is None:
            target = k
        reports.append(
            StateReport(
                index=k,
                energy=float(solution.energies[k]),
                delta=float(solution.energies[k] - e0),
                psi00=complex(p00),
                psi00_ratio=ratio,
                i2=i2_collision(st, grid),
                is_triple_collision=flagged,
            )
        )
    return Classification(reports=reports, target_index=target, tau=tau, block=block)


# ---------------------------------------------------------------------------
# exports


def write_spectrum_csv(classification: Classification, path) -> None:
    with open(path, "w") as fh:
        fh.write("index,energy,delta,psi00_abs,i2,flagged\n")
        for r in classification.reports:
            fh.write(
                f"{r.index},{r.energy:.17g},{r.delta:.17g},"
                f"{abs(r.psi00):.17g},{r.i2:.17g},{int(r.is_triple_collision)}\n"
            )


def write_wavefunction_csv(state: np.ndarray, grid: RadialGrid, path) -> None:
    """Grid dump R,rho,psi of one (real) eigenstate for plotting."""
    psi2 = grid.reshape(np.real(state))
    nodes = grid.nodes
    with open(path, "w") as fh:
        fh.write("R,rho,psi\n")
        for i, R in enumerate(nodes):
            for j, rho in enumerate(nodes):
                fh.write(f"{R:.17g},{rho:.17g},{psi2[i, j]:.17g}\n")


# ---------------------------------------------------------------------------
# eigenbasis cache

_CACHE_VERSION = "coul3b-eigenbasis-v1"


def _canonical_key_string(spec: GridSpec, params: PhysicalParams, count: int) -> str:
    return (
        f"{_CACHE_VERSION}|mu={params.mu!r}|Z={params.Z!r}|q={params.q!r}"
        f"|n={spec.n}|L={spec.box_length!r}|count={count}"
    )


def cache_key(spec: GridSpec, params: PhysicalParams, count: int) -> str:
    """Content hash identifying one (grid, params, count) eigenbasis."""
    return hashlib.sha256(
        _canonical_key_string(spec, params, count).encode()
    ).hexdigest()


def _solution_digest(energies: np.ndarray, states: np.ndarray) -> str:
    dig = hashlib.sha256()
    dig.update(energies.tobytes())
    dig.update(np.ascontiguousarray(states).tobytes())
    return dig.hexdigest()


def save_cached_solution(cache_dir, solution: EigenSolution, params: PhysicalParams) -> str:
    """Store the eigenbasis under its content key; returns the key."""
    from pathlib import Path

    key = cache_key(solution.grid.spec, params, solution.count)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    np.savez(
        cache_dir / f"{key}.npz",
        energies=solution.energies,
        states=solution.states,
        digest=np.frombuffer(
            _solution_digest(solution.energies, solution.states).encode(), dtype=np.uint8
        ),
        meta=np.array(_canonical_key_string(solution.grid.spec, params, solution.count)),
    )
    return key


def load_cached_solution(
    cache_dir, spec: GridSpec, params: PhysicalParams, count: int
) -> EigenSolution | None:
    """Load a cached eigenbasis; None on miss or integrity failure."""
    from pathlib import Path

    path = Path(cache_dir) / f"{cache_key(spec, params, count)}.npz"
    if not path.exists():
        return None
    try:
        with np.load(path, allow_pickle=False) as npz:
            energies = npz["energies"]
            states = npz["states"]
            stored_digest = npz["digest"].tobytes().decode()
            meta = str(npz["meta"])
    except (OSError, KeyError, ValueError, zipfile.BadZipFile) as exc:
        print(f"warning: unreadable cache entry {path.name}: {exc}", file=sys.stderr)
        return None
    if meta != _canonical_key_string(spec, params, count) or stored_digest != _solution_digest(
        energies, states
    ):
        print(f"warning: corrupt cache entry {path.name}, recomputing", file=sys.stderr)
        return None
    return EigenSolution(energies=energies, states=states, grid=build_grid(spec))
