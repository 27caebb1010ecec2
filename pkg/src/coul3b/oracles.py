"""Independent analytic checks of the solver and the propagator.

These are self-contained: the hydrogen oracle compares the 1-D radial scheme
against the closed-form bound-state series of -(1/r^2) d/dr (r^2 d/dr) - q/r,
which is -q^2/(4 k^2); the Rabi oracle compares two-level constant-field
propagation against the closed-form occupation formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .control_ops import ProjectedOperator
from .discretization import radial_kinetic_1d
from .propagation import step


@dataclass(frozen=True)
class OracleResult:
    name: str
    computed: np.ndarray
    expected: np.ndarray
    rel_error: np.ndarray
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.rel_error < self.tolerance))


def hydrogen_oracle(n: int = 2000, L: float = 60.0, q: float = 1.0,
                    levels: int = 3, tolerance: float = 0.03) -> OracleResult:
    """Lowest radial levels of -(1/r^2) d/dr (r^2 d/dr) - q/r vs -q^2/(4 k^2)."""
    h = L / n
    r = np.arange(1, n) * h
    kin = radial_kinetic_1d(n, h, 1.0)
    diag = kin.diagonal(0) - q / r
    off = kin.diagonal(1)
    vals = sla.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, levels - 1), eigvals_only=True
    )
    k = np.arange(1, levels + 1)
    expected = -(q**2) / (4.0 * k**2)
    rel = np.abs((vals - expected) / expected)
    return OracleResult("hydrogen", vals, expected, rel, tolerance)


def rabi_occupation(eps: float, t: float) -> float:
    """Closed-form excited occupation for E = {0, 1} and coupling -eps."""
    omega = np.sqrt(1.0 + 4.0 * eps**2)
    return (4.0 * eps**2 / omega**2) * np.sin(omega * t / 2.0) ** 2


def rabi_oracle(eps: float = 0.3, dt: float = 0.05, n_steps: int = 200,
                tolerance: float = 1e-10) -> OracleResult:
    """Two-level constant-field propagation vs the closed-form Rabi formula."""
    B = ProjectedOperator(
        matrix=np.array([[0.0, 1.0], [1.0, 0.0]]), kind="toy", basis=None
    )
    energies = np.array([0.0, 1.0])
    psi = np.array([1.0, 0.0], dtype=complex)
    computed = np.zeros(n_steps)
    expected = np.zeros(n_steps)
    for m in range(n_steps):
        psi = step(psi, energies, B, eps, dt)
        computed[m] = abs(psi[1]) ** 2
        expected[m] = rabi_occupation(eps, (m + 1) * dt)
    rel = np.abs(computed - expected) / np.maximum(np.abs(expected), 1e-3)
    return OracleResult("rabi", computed, expected, rel, tolerance)
