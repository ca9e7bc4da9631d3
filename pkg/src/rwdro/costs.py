"""Norm-power transport costs and the Gibbs reference coupling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError
from .measures import Coupling, DiscreteMeasure, Grid

NORMS = ("l1", "l2", "linf")
_ORD = {"l1": 1, "l2": 2, "linf": np.inf}


@dataclass(frozen=True)
class CostSpec:
    norm: str = "l2"
    p: float = 1.0

    def __post_init__(self):
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}, got {self.norm!r}")
        if not self.p >= 1:
            raise ValueError(f"cost exponent p must be >= 1, got {self.p}")


def norm(spec: CostSpec, v: np.ndarray, axis=-1) -> np.ndarray:
    return np.linalg.norm(v, ord=_ORD[spec.norm], axis=axis)


def cost(spec: CostSpec, x, y) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(norm(spec, x - y) ** spec.p)


def cost_matrix(spec: CostSpec, grid: Grid) -> np.ndarray:
    diff = grid.points[:, None, :] - grid.points[None, :, :]
    return norm(spec, diff) ** spec.p


def lipschitz_estimate(grid: Grid, values) -> float:
    """Largest slope between axis-adjacent grid points.

    This underestimates the Lipschitz constant of a general function; it is
    exact for functions that are linear between neighbouring grid points.
    """
    v = np.asarray(values, dtype=float).reshape((grid.points_per_axis,) * grid.dim)
    best = 0.0
    for ax, h in enumerate(grid.spacing):
        if v.shape[ax] > 1:
            best = max(best, float(np.max(np.abs(np.diff(v, axis=ax)))) / h)
    return best


def cost_lipschitz(spec: CostSpec, grid: Grid) -> float:
    """Slope estimate of zeta -> c(xi, zeta), maximized over grid points xi."""
    C = cost_matrix(spec, grid)
    return max(lipschitz_estimate(grid, row) for row in C)


@dataclass(frozen=True, eq=False)
class ReferenceCoupling:
    """pi0(dxi, dzeta) proportional to P(dxi) exp(-c(xi, zeta) / (2^(p-1) sigma)) on the grid."""

    coupling: Coupling
    sigma: float
    first: DiscreteMeasure
    spec: CostSpec
    conditional: np.ndarray  # row-stochastic, defined for every row

    @property
    def weights(self) -> np.ndarray:
        return self.coupling.weights

    @property
    def grid(self) -> Grid:
        return self.coupling.grid


def gibbs_log_kernel(spec: CostSpec, grid: Grid, sigma: float) -> np.ndarray:
    return -cost_matrix(spec, grid) / (2 ** (spec.p - 1) * sigma)


def build_reference(P: DiscreteMeasure, spec: CostSpec, sigma: float) -> ReferenceCoupling:
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    logk = gibbs_log_kernel(spec, P.grid, sigma)
    # every row contains the diagonal entry 0, so the row max is 0
    k = np.exp(logk - logk.max(axis=1, keepdims=True))
    cond = k / k.sum(axis=1, keepdims=True)
    cond.setflags(write=False)
    w = P.weights[:, None] * cond
    return ReferenceCoupling(Coupling(P.grid, w, first=P), float(sigma), P, spec, cond)


def expected_cost(coupling: Coupling, spec: CostSpec) -> float:
    return math.fsum((coupling.weights * cost_matrix(spec, coupling.grid)).ravel())


def calibrate_sigma(P: DiscreteMeasure, spec: CostSpec, rho: float, max_halvings: int = 200) -> float:
    """Halve sigma from 1 until the reference coupling spends at most rho/2 of transport budget.

    On a finite grid the expected cost of pi0 tends to 0 as sigma -> 0, since
    every conditional concentrates on the zero-cost diagonal.
    """
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    sigma = 1.0
    for _ in range(max_halvings + 1):
        if expected_cost(build_reference(P, spec, sigma).coupling, spec) <= rho / 2:
            return sigma
        sigma /= 2
    raise InfeasibleError(f"no sigma found after {max_halvings} halvings with E_pi0 c <= rho/2")
