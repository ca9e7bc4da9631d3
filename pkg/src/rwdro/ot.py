"""Exact and entropic optimal transport between two measures on a grid.

Both solvers are independent cross-checks for the coupling machinery; they
are not tuned for size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from .costs import CostSpec, cost_matrix
from .errors import SizeError
from .measures import Coupling, DiscreteMeasure, kl_weights

MAX_ATOMS = 64


@dataclass(frozen=True, eq=False)
class OtResult:
    value: float
    coupling: Coupling
    iterations: int
    converged: bool
    potential: np.ndarray | None = None  # second-marginal potential (Sinkhorn only)
    marginal_error: float = 0.0


def _check_pair(P: DiscreteMeasure, Q: DiscreteMeasure):
    if not P.grid.same_as(Q.grid):
        raise ValueError("P and Q live on different grids")


def wasserstein_exact(P: DiscreteMeasure, Q: DiscreteMeasure, spec: CostSpec) -> OtResult:
    _check_pair(P, Q)
    I, J = P.support, Q.support
    if len(I) > MAX_ATOMS or len(J) > MAX_ATOMS:
        raise SizeError(f"supports of size {len(I)}x{len(J)} exceed the {MAX_ATOMS}-atom cap")
    C = cost_matrix(spec, P.grid)[np.ix_(I, J)]
    m, n = len(I), len(J)
    A_eq = np.zeros((m + n, m * n))
    for r in range(m):
        A_eq[r, r * n:(r + 1) * n] = 1.0
    for c in range(n):
        A_eq[m + c, c::n] = 1.0
    b_eq = np.concatenate([P.weights[I], Q.weights[J]])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    x = np.clip(res.x.reshape(m, n), 0, None)
    W = np.zeros((P.grid.size, P.grid.size))
    W[np.ix_(I, J)] = x
    W /= W.sum()
    return OtResult(float(res.fun), Coupling(P.grid, W), int(res.nit), True)


def sinkhorn(P: DiscreteMeasure, Q: DiscreteMeasure, spec: CostSpec, eps: float,
             tol: float = 1e-9, max_iter: int = 100_000) -> OtResult:
    """Log-domain Sinkhorn for min E_pi c + eps KL(pi | P x Q).

    Iterates until the total-variation error of both marginals is at most
    ``tol``. Reports ``converged=False`` instead of raising when the
    iteration cap is hit.
    """
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    _check_pair(P, Q)
    I, J = P.support, Q.support
    a, b = P.weights[I], Q.weights[J]
    la, lb = np.log(a), np.log(b)
    C = cost_matrix(spec, P.grid)[np.ix_(I, J)]
    f = np.zeros(len(I))
    g = np.zeros(len(J))
    err = math.inf
    it = 0
    while it < max_iter:
        it += 1
        f = -eps * logsumexp(lb[None, :] + (g[None, :] - C) / eps, axis=1)
        g = -eps * logsumexp(la[:, None] + (f[:, None] - C) / eps, axis=0)
        logpi = la[:, None] + lb[None, :] + (f[:, None] + g[None, :] - C) / eps
        pi = np.exp(logpi)
        # columns are exact after the g-update
        err = float(np.sum(np.abs(pi.sum(axis=1) - a)) + np.sum(np.abs(pi.sum(axis=0) - b)))
        if err <= tol:
            break
    W = np.zeros((P.grid.size, P.grid.size))
    W[np.ix_(I, J)] = pi
    ref = np.outer(P.weights, Q.weights)
    value = math.fsum((W * cost_matrix(spec, P.grid)).ravel()) + eps * kl_weights(W, ref)
    potential = np.zeros(P.grid.size)
    potential[J] = g
    # W is only approximately normalized at the stopping tolerance
    coupling = Coupling(P.grid, W / W.sum())
    return OtResult(value, coupling, it, err <= tol, potential, err)


def sinkhorn_dual_value(P: DiscreteMeasure, Q: DiscreteMeasure, spec: CostSpec, eps: float,
                        potential) -> float:
    """Semi-dual objective E_Q g - eps E_{x~P} log E_{y~Q} exp((g(y) - c(x, y)) / eps).

    ``potential`` is g, given on every grid point; only Q's support matters.
    """
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    _check_pair(P, Q)
    g = np.asarray(potential, dtype=float).ravel()
    I, J = P.support, Q.support
    C = cost_matrix(spec, P.grid)[np.ix_(I, J)]
    lse = logsumexp(np.log(Q.weights[J])[None, :] + (g[J][None, :] - C) / eps, axis=1)
    return math.fsum(Q.weights[J] * g[J]) - eps * math.fsum(P.weights[I] * lse)
