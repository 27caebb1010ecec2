"""Physical parameters and the reduced two-coordinate Coulomb potential.

The system is two positive charges (Z, mass M) and one light negative charge
(q, mass m), described after angular reduction by the heavy-pair separation R
and the light-particle radius rho, both dimensionless.  The light-heavy
attraction to the second positive charge enters through its angular average,
which for an isotropic state equals 1/max(R, rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionless system constants.

    mu is the light/heavy mass ratio m/M (the default is roughly the
    electron/deuteron value), Z the positive charge number, q the negative
    charge number.  All energies and lengths are in the rescaled units in
    which hbar = 1 and the light-particle kinetic term carries unit factor.
    """

    mu: float = 2.7e-4
    Z: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0 and self.Z > 0 and self.q > 0):
            raise ValueError(f"mu, Z, q must all be positive, got {self}")


def potential(R, rho, params: PhysicalParams):
    """Angle-averaged potential Z/R - q/rho - q/max(R, rho).

    Accepts scalars or broadcastable arrays.  The third term counts the
    light-to-second-charge attraction once; on the diagonal R = rho this is
    the correct angular average of the three-dimensional Coulomb term.
    """
    R = np.asarray(R, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(R <= 0) or np.any(rho <= 0):
        raise ValueError("potential is singular: R and rho must be positive")
    out = params.Z / R - params.q / rho - params.q / np.maximum(R, rho)
    return out if out.ndim else float(out)


def potential_3d(R, rho, theta, params: PhysicalParams):
    """Unreduced potential with the explicit angle between the two radii.

    The light particle sits at distance sqrt(R^2 + rho^2 - 2 R rho cos(theta))
    from the second positive charge.  Raises at coincidence points where that
    separation vanishes.
    """
    R = np.asarray(R, dtype=float)
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(R <= 0) or np.any(rho <= 0):
        raise ValueError("potential_3d is singular: R and rho must be positive")
    sep2 = R**2 + rho**2 - 2.0 * R * rho * np.cos(theta)
    if np.any(sep2 <= 0):
        raise ValueError("potential_3d: coincidence point, particle separation vanishes")
    out = params.Z / R - params.q / rho - params.q / np.sqrt(sep2)
    return out if out.ndim else float(out)


def attractive_boundary(R: float, params: PhysicalParams) -> float:
    """Largest rho below which the potential is negative in the branch rho < R.

    For Z > q this is q R / (Z - q).  For Z <= q the whole inner region is
    attractive and the function returns +inf as a sentinel.
    """
    if R <= 0:
        raise ValueError("attractive_boundary requires R > 0")
    if params.Z <= params.q:
        return math.inf
    return params.q * R / (params.Z - params.q)
