"""Radial grid, measure weights, and flux-form assembly of the Hamiltonian.

The two radial kinetic terms -mass (1/r^2) d/dr (r^2 d/dr) are discretized in
flux (finite-volume) form on the uniform nodes r_i = i*h, i = 1..n-1, with a
zero-flux closure at the inner boundary and a Dirichlet wall at r = L.  The
resulting operator is self-adjoint under the radial measure r^2 dr; the
assembled matrix is stored in the measure-symmetrized representation
S = D^{1/2} A D^{-1/2} with D = diag(r_i^2), which is exactly symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .model import PhysicalParams, potential


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid over (0, L]^2: n cells per axis, nodes at i*L/n."""

    n: int = 80
    box_length: float = 40.0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 8:
            raise ConfigError(f"grid needs an integer n >= 8, got n={self.n!r}")
        if not self.box_length > 0:
            raise ConfigError(f"box_length must be positive, got {self.box_length!r}")

    @property
    def h(self) -> float:
        return self.box_length / self.n

    @property
    def nodes_per_axis(self) -> int:
        # node at 0 excluded (singular point), node at L excluded (Dirichlet wall)
        return self.n - 1

    @property
    def size(self) -> int:
        return (self.n - 1) ** 2


@dataclass(frozen=True)
class MeasureWeights:
    """Separable quadrature weights w(i,j) = wR(i) * wrho(j) = R_i^2 rho_j^2 h^2."""

    wR: np.ndarray
    wrho: np.ndarray
    flat: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if np.any(self.wR <= 0) or np.any(self.wrho <= 0):
            raise ValueError("measure weights must be strictly positive")
        object.__setattr__(self, "flat", np.outer(self.wR, self.wrho).ravel())


@dataclass(frozen=True)
class RadialGrid:
    """Node coordinates and measure weights for one GridSpec."""

    spec: GridSpec
    nodes: np.ndarray
    weights: MeasureWeights

    @property
    def shape(self) -> tuple[int, int]:
        m = self.spec.nodes_per_axis
        return (m, m)

    def reshape(self, state: np.ndarray) -> np.ndarray:
        """View a flat grid function as a 2-D array indexed [R_i, rho_j]."""
        return np.asarray(state).reshape(self.shape)

    def flat_index(self, i: int, j: int) -> int:
        return i * self.spec.nodes_per_axis + j

    def node_of(self, flat: int) -> tuple[int, int]:
        return divmod(flat, self.spec.nodes_per_axis)


def build_grid(spec: GridSpec) -> RadialGrid:
    """Nodes r_i = i*h for i = 1..n-1 and the measure weights r^2 h per axis."""
    h = spec.h
    nodes = np.arange(1, spec.n) * h
    w1d = nodes**2 * h
    return RadialGrid(spec=spec, nodes=nodes, weights=MeasureWeights(wR=w1d, wrho=w1d))


def radial_kinetic_1d(n: int, h: float, mass_factor: float) -> sp.csr_matrix:
    """Measure-symmetrized flux-form kinetic matrix, symmetric tridiagonal.

    Acting on psi, the underlying operator is
        (A psi)_i = -(mass/(r_i^2 h^2)) [ r_{i+1/2}^2 (psi_{i+1} - psi_i)
                                        - r_{i-1/2}^2 (psi_i  - psi_{i-1}) ]
    with the inward flux dropped at i = 1 (regularity closure) and psi = 0
    beyond i = n-1 (Dirichlet wall).  Returned as D^{1/2} A D^{-1/2}.
    """
    if n < 8:
        raise ConfigError(f"radial_kinetic_1d needs n >= 8, got {n}")
    if not (h > 0 and mass_factor > 0):
        raise ConfigError("radial_kinetic_1d needs h > 0 and mass_factor > 0")
    i = np.arange(1, n, dtype=float)
    up2 = (i + 0.5) ** 2          # r_{i+1/2}^2 / h^2
    dn2 = (i - 0.5) ** 2
    diag = (up2 + dn2) / i**2
    diag[0] = up2[0] / i[0] ** 2  # zero-flux closure: no r_{1/2}^2 term
    off = -up2[:-1] / (i[:-1] * (i[:-1] + 1.0))
    scale = mass_factor / h**2
    return sp.diags(
        [off * scale, diag * scale, off * scale], [-1, 0, 1], format="csr"
    )


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Symmetric sparse Hamiltonian in the measure-symmetrized representation."""

    matrix: sp.csr_matrix
    grid: RadialGrid
    params: PhysicalParams

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def assemble_hamiltonian(spec: GridSpec, params: PhysicalParams) -> HamiltonianMatrix:
    """Kinetic (R channel, factor mu) + kinetic (rho channel) + diagonal potential.

    The grid excludes both the R = rho = 0 singular point and the outer wall,
    so the potential is finite at every node.  Assembly combines exactly
    symmetric blocks, hence the result is exactly symmetric.
    """
    grid = build_grid(spec)
    m = spec.nodes_per_axis
    t_R = radial_kinetic_1d(spec.n, spec.h, params.mu)
    t_rho = radial_kinetic_1d(spec.n, spec.h, 1.0)
    eye = sp.identity(m, format="csr")
    v = potential(grid.nodes[:, None], grid.nodes[None, :], params)
    S = (
        sp.kron(t_R, eye, format="csr")
        + sp.kron(eye, t_rho, format="csr")
        + sp.diags(v.ravel())
    )
    return HamiltonianMatrix(matrix=S.tocsr(), grid=grid, params=params)


def inner_product(f: np.ndarray, g: np.ndarray, weights: MeasureWeights):
    """Measure inner product sum conj(f) g w, conjugate-linear in f."""
    f = np.asarray(f).ravel()
    g = np.asarray(g).ravel()
    w = weights.flat
    if f.shape != g.shape or f.shape != w.shape:
        raise ValueError(
            f"inner_product dimension mismatch: {f.shape}, {g.shape}, weights {w.shape}"
        )
    return np.sum(np.conj(f) * g * w)


def export_matrix_coo(H: HamiltonianMatrix, path) -> None:
    """Dump the symmetrized matrix as 'i j value' triples for external checks."""
    coo = H.matrix.tocoo()
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {v:.17g}\n")
