"""KL-regularized WDRO: log-sum-exp dual, dual bound and primal recovery.

The regularized problem is

    sup  E_{pi_2} f - eps KL(pi | pi0)   s.t.  E_pi c + delta KL(pi | pi0) <= rho,

over couplings with first marginal P. Its dual is a one-dimensional convex
program in lam whose objective smooths the inner max with temperature
beta = eps + lam * delta. The derivative of that objective is the
constraint slack of the tilted coupling, which is what the final bisection
step uses to land on the feasible side of the optimum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .costs import ReferenceCoupling, expected_cost
from .dual import DualSolution, ProblemSpec
from .errors import ConfigError, InfeasibleError
from .measures import Coupling, kl_divergence
from .scalar import bisect_sign, golden_section

BETA_FLOOR = 1e-12


@dataclass(frozen=True)
class RegParams:
    eps: float
    delta: float
    sigma: float = 1.0

    def __post_init__(self):
        if self.eps < 0 or self.delta < 0:
            raise ConfigError("eps and delta must be >= 0")
        if not self.sigma > 0:
            raise ConfigError("sigma must be > 0")


@dataclass(frozen=True)
class DualityReport:
    primal_value: float
    gap: float
    slack: float
    complementary: float  # lam* |slack|


@dataclass(frozen=True, eq=False)
class EntropicSolution:
    dual: DualSolution
    primal_coupling: Coupling
    primal_value: float
    feasibility_slack: float
    duality_gap: float

    @property
    def value(self) -> float:
        return self.dual.value

    @property
    def lambda_star(self) -> float:
        return self.dual.lambda_star


def _check_pi0(prob: ProblemSpec, pi0: ReferenceCoupling):
    if not pi0.grid.same_as(prob.grid):
        raise ValueError("reference coupling lives on a different grid")
    if np.max(np.abs(pi0.first.weights - prob.P.weights)) > 1e-12:
        raise ValueError("reference coupling does not have P as first marginal")


def _log_cond(pi0: ReferenceCoupling, rows) -> np.ndarray:
    q = pi0.conditional[rows]
    with np.errstate(divide="ignore"):
        return np.log(q)


def _row_lse(prob: ProblemSpec, pi0: ReferenceCoupling, lam: float, beta: float):
    """Per-row m + beta log sum_j q_j exp((h_j - m) / beta) over pi0's support."""
    rows = prob.rows
    h = prob.f[None, :] - lam * prob.C[rows]
    logq = _log_cond(pi0, rows)
    h_supp = np.where(np.isfinite(logq), h, -np.inf)
    m = h_supp.max(axis=1)
    if beta < BETA_FLOOR:
        return m, None
    z = logq + (h_supp - m[:, None]) / beta
    zmax = z.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    return m + beta * lse, z


def entropic_dual_value(prob: ProblemSpec, reg: RegParams, pi0: ReferenceCoupling, lam: float) -> float:
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if reg.eps + reg.delta == 0:
        raise ConfigError("eps + delta = 0: use the unregularized solver")
    beta = reg.eps + lam * reg.delta
    vals, _ = _row_lse(prob, pi0, lam, beta)
    return lam * prob.rho + math.fsum(prob.P.weights[prob.rows] * vals)


def lambda_bar(prob: ProblemSpec, pi0: ReferenceCoupling) -> float:
    """Explicit bound 2 sup|f| / (rho - E_pi0 c) on the optimal multiplier."""
    ec = expected_cost(pi0.coupling, prob.cost)
    if ec >= prob.rho:
        raise InfeasibleError(
            f"E_pi0 c = {ec:.6g} >= rho = {prob.rho:.6g}: decrease sigma (see calibrate_sigma)"
        )
    return 2 * float(np.max(np.abs(prob.f))) / (prob.rho - ec)


def recover_primal(prob: ProblemSpec, reg: RegParams, pi0: ReferenceCoupling, lambda_star: float) -> Coupling:
    """Tilt each conditional of pi0 by exp((f - lam c) / beta) and renormalize."""
    beta = reg.eps + lambda_star * reg.delta
    if not beta > 0:
        raise ValueError("degenerate tilt: eps + lambda_star * delta = 0")
    rows = prob.rows
    _, z = _row_lse(prob, pi0, lambda_star, beta)
    t = np.exp(z - z.max(axis=1, keepdims=True))
    t /= t.sum(axis=1, keepdims=True)
    W = np.zeros((prob.grid.size, prob.grid.size))
    W[rows] = prob.P.weights[rows, None] * t
    return Coupling(prob.grid, W, first=prob.P)


def _slack_closed_form(prob: ProblemSpec, reg: RegParams, pi0: ReferenceCoupling, lam: float) -> float:
    """rho - E c - delta KL for the tilted coupling at lam; equals the dual derivative."""
    beta = reg.eps + lam * reg.delta
    rows = prob.rows
    lse_vals, z = _row_lse(prob, pi0, lam, beta)
    t = np.exp(z - z.max(axis=1, keepdims=True))
    t /= t.sum(axis=1, keepdims=True)
    Pw = prob.P.weights[rows]
    ec = math.fsum((Pw[:, None] * t * prob.C[rows]).ravel())
    if reg.delta == 0:
        return prob.rho - ec
    # log(t / q) = (h - row_lse) / beta on the support
    h = prob.f[None, :] - lam * prob.C[rows]
    logratio = np.where(t > 0, (h - lse_vals[:, None]) / beta, 0.0)
    kl = math.fsum((Pw[:, None] * t * logratio).ravel())
    return prob.rho - ec - reg.delta * kl


def verify_duality(prob: ProblemSpec, reg: RegParams, pi0: ReferenceCoupling,
                   solution: Coupling, lambda_star: float, dual_value: float) -> DualityReport:
    """Primal value, duality gap and constraint slack of a recovered coupling."""
    kl = kl_divergence(solution, pi0.coupling)
    ef = math.fsum((solution.weights.sum(axis=0) * prob.f))
    primal = ef - reg.eps * kl
    slack = prob.rho - expected_cost(solution, prob.cost) - reg.delta * kl
    return DualityReport(primal, dual_value - primal, slack, lambda_star * abs(slack))


def solve_entropic(prob: ProblemSpec, reg: RegParams, pi0: ReferenceCoupling,
                   tol: float = 1e-10) -> EntropicSolution:
    if reg.eps + reg.delta == 0:
        raise ConfigError("eps + delta = 0: use the unregularized solver")
    _check_pi0(prob, pi0)
    lbar = lambda_bar(prob, pi0)

    def g(lam):
        return entropic_dual_value(prob, reg, pi0, lam)

    res = golden_section(g, 0.0, lbar, tol)
    lam = _polish(prob, reg, pi0, res.lo, res.hi, lbar, tol)
    value = g(lam)
    # eps = 0 with lam = 0: the maximizer is the beta -> 0 limit of the tilt
    lam_tilt = lam if reg.eps + lam * reg.delta > 0 else 10 * BETA_FLOOR / reg.delta
    pi = recover_primal(prob, reg, pi0, lam_tilt)
    rep = verify_duality(prob, reg, pi0, pi, lam, value)
    rows = prob.rows
    argmax = np.full(prob.grid.size, -1)
    argmax[rows] = np.argmax(prob.f[None, :] - lam * prob.C[rows], axis=1)
    dual = DualSolution(lam, value, tuple(int(k) for k in argmax), lbar, gap=rep.gap,
                        evaluations=res.evaluations)
    return EntropicSolution(dual, pi, rep.primal_value, rep.slack, rep.gap)


def _polish(prob, reg, pi0, lo, hi, lbar, tol) -> float:
    """Locate the sign change of the dual derivative inside the final bracket.

    Golden-section resolves a smooth minimizer only to about sqrt(machine eps)
    because the objective is flat there; the derivative is not, so a sign
    bisection recovers the minimizer to full precision and returns a point on
    the feasible (slack >= 0) side.
    """

    # with eps = 0 the tilt at lam = 0 is undefined; probe just inside instead
    lam_min = 0.0 if reg.eps > 0 else 10 * BETA_FLOOR / reg.delta

    def s(lam):
        return _slack_closed_form(prob, reg, pi0, max(lam, lam_min))

    if s(0.0) >= 0:
        return 0.0
    lo = max(0.0, lo - 10 * tol)
    hi = min(lbar, hi + 10 * tol)
    if s(lo) >= 0:
        lo, hi = 0.0, lo
    elif s(hi) < 0:
        lo, hi = hi, lbar
        if s(hi) < 0:
            return hi
    return bisect_sign(s, lo, hi)
