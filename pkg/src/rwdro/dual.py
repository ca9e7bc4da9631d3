"""Unregularized and cost-regularized WDRO through its one-dimensional dual.

The worst-case expectation over couplings pinned to P with budget
E_pi c <= rho equals

    inf_{lam >= 0} lam * rho + E_{x~P} max_y [f(y) - (eps + (1 + delta) lam) c(x, y)]

when the objective is penalized by eps * E_pi c and the budget inflated to
(1 + delta) E_pi c. The dual is convex and piecewise linear in lam.

The search interval [0, osc(f)/rho + 1] is safe: the diagonal plan gives
g(lam) >= lam * rho + E_P f, while g(lam*) <= g(0) = max f, hence
lam* <= (max f - E_P f) / rho <= osc(f) / rho.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog

from .costs import CostSpec, cost_matrix
from .errors import SizeError
from .measures import Coupling, DiscreteMeasure, Grid
from .scalar import golden_section

LP_MAX_POINTS = 64


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    grid: Grid
    P: DiscreteMeasure
    f: np.ndarray
    cost: CostSpec
    rho: float

    def __post_init__(self):
        f = np.array(self.f, dtype=float).ravel()
        if f.shape[0] != self.grid.size:
            raise ValueError(f"objective has {f.shape[0]} values for {self.grid.size} grid points")
        if not np.all(np.isfinite(f)):
            raise ValueError("objective values must be finite")
        if not self.rho > 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if not self.P.grid.same_as(self.grid):
            raise ValueError("P is defined on a different grid")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "rho", float(self.rho))

    @cached_property
    def C(self) -> np.ndarray:
        C = cost_matrix(self.cost, self.grid)
        C.setflags(write=False)
        return C

    @cached_property
    def rows(self) -> np.ndarray:
        """Source points carrying positive mass under P."""
        return self.P.support

    @property
    def osc(self) -> float:
        return float(self.f.max() - self.f.min())

    def with_rho(self, rho: float) -> "ProblemSpec":
        return ProblemSpec(self.grid, self.P, self.f, self.cost, rho)

    def with_f(self, f) -> "ProblemSpec":
        return ProblemSpec(self.grid, self.P, f, self.cost, self.rho)


@dataclass(frozen=True)
class DualSolution:
    lambda_star: float
    value: float
    inner_argmax: tuple[int, ...]
    lambda_bound: float
    gap: float = math.nan
    residual: float = math.nan
    evaluations: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0 <= self.lambda_star <= self.lambda_bound:
            raise ValueError(f"lambda_star={self.lambda_star} outside [0, {self.lambda_bound}]")
        if not math.isfinite(self.value):
            raise ValueError("dual value is not finite")


def inner_sup(prob: ProblemSpec, x_index: int, lam: float) -> tuple[float, int]:
    """max_y f(y) - lam c(x, y); ties go to the smallest grid index."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    row = prob.f - lam * prob.C[x_index]
    j = int(np.argmax(row))
    return float(row[j]), j


def _row_max(prob: ProblemSpec, slope: float) -> tuple[np.ndarray, np.ndarray]:
    R = prob.f[None, :] - slope * prob.C[prob.rows]
    j = np.argmax(R, axis=1)
    return R[np.arange(len(j)), j], j


def dual_value_cost_reg(prob: ProblemSpec, eps: float, delta: float, lam: float) -> float:
    if lam < 0:
        raise ValueError("lam must be >= 0")
    vals, _ = _row_max(prob, eps + (1 + delta) * lam)
    return lam * prob.rho + math.fsum(prob.P.weights[prob.rows] * vals)


def solve_cost_reg(prob: ProblemSpec, eps: float = 0.0, delta: float = 0.0,
                   tol: float = 1e-9) -> DualSolution:
    if eps < 0 or delta < 0:
        raise ValueError("eps and delta must be >= 0")
    hi = prob.osc / prob.rho + 1.0
    res = golden_section(lambda lam: dual_value_cost_reg(prob, eps, delta, lam), 0.0, hi, tol)
    argmax = np.full(prob.grid.size, -1)
    _, j = _row_max(prob, eps + (1 + delta) * res.x)
    argmax[prob.rows] = j
    return DualSolution(res.x, res.fx, tuple(int(k) for k in argmax), hi, evaluations=res.evaluations)


def primal_lp_unreg(prob: ProblemSpec) -> tuple[float, Coupling]:
    """Brute-force primal: max E_{pi_2} f over pi with first marginal P and E_pi c <= rho."""
    n = prob.grid.size
    if n > LP_MAX_POINTS:
        raise SizeError(f"grid of {n} points exceeds the LP oracle cap of {LP_MAX_POINTS}")
    I = prob.rows
    m = len(I)
    C = prob.C[I]
    obj = -np.tile(prob.f, m)
    A_eq = np.zeros((m, m * n))
    for r in range(m):
        A_eq[r, r * n:(r + 1) * n] = 1.0
    res = linprog(obj, A_ub=C.ravel()[None, :], b_ub=[prob.rho], A_eq=A_eq,
                  b_eq=prob.P.weights[I], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"primal LP failed: {res.message}")
    W = np.zeros((n, n))
    W[I] = np.clip(res.x.reshape(m, n), 0, None)
    # restore exact row sums lost to solver round-off
    W[I] *= (prob.P.weights[I] / W[I].sum(axis=1))[:, None]
    return -float(res.fun), Coupling(prob.grid, W, first=prob.P)
