"""Numerical companions to the approximation theory of entropic regularization.

Everything here is evaluated on the grid: the continuum integrals that
appear in the bounds (ball volumes, the Gibbs normalizer I_sigma) are
replaced by closed forms for boxes or by midpoint sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gamma

from .costs import ReferenceCoupling, cost_lipschitz, gibbs_log_kernel, lipschitz_estimate, norm
from .dual import LP_MAX_POINTS, ProblemSpec, primal_lp_unreg, solve_cost_reg
from .entropic import RegParams, _row_lse, lambda_bar, solve_entropic
from .measures import Coupling, Grid, kl_divergence
from .parallel import ordered_map

N_RADII = 64
QUAD_CELLS = 10_000


def _ball_box_volume(grid: Grid, center: np.ndarray, radius: float, norm_name: str) -> float:
    lo = np.maximum([b[0] for b in grid.bounds], center - radius)
    hi = np.minimum([b[1] for b in grid.bounds], center + radius)
    if np.any(hi <= lo):
        return 0.0
    if grid.dim == 1 or norm_name == "linf":
        return float(np.prod(hi - lo))
    # midpoint rule on the box-ball bounding box, QUAD_CELLS cells in total
    k = int(round(math.sqrt(QUAD_CELLS)))
    xs = lo[0] + (np.arange(k) + 0.5) * (hi[0] - lo[0]) / k
    ys = lo[1] + (np.arange(k) + 0.5) * (hi[1] - lo[1]) / k
    X, Y = np.meshgrid(xs - center[0], ys - center[1], indexing="ij")
    if norm_name == "l2":
        inside = X ** 2 + Y ** 2 <= radius ** 2
    else:
        inside = np.abs(X) + np.abs(Y) <= radius
    return float(inside.sum()) * (hi[0] - lo[0]) * (hi[1] - lo[1]) / k ** 2


def volume_constant(grid: Grid, norm_name: str = "linf", radii=None) -> float:
    """inf over grid points xi and radii in (0, d] of vol(box & B(xi, r)) / r^d.

    Radii are sampled on a log grid of N_RADII points ending at d.
    """
    d = grid.dim
    if radii is None:
        radii = np.geomspace(1e-3 * d, d, N_RADII)
    best = math.inf
    for x in grid.points:
        for r in radii:
            best = min(best, _ball_box_volume(grid, x, r, norm_name) / r ** d)
    return best


def block_approximation(targets: Sequence[int], pi0: ReferenceCoupling, delta_radius: float) -> Coupling:
    """Restrict each conditional of pi0 to the ball of radius ``delta_radius`` around its target.

    ``targets[i]`` is the grid index y*(x_i). A row whose restricted pi0-mass
    vanishes becomes a Dirac at the target.
    """
    if not delta_radius > 0:
        raise ValueError("delta_radius must be > 0")
    grid = pi0.grid
    P = pi0.first.weights
    W = np.zeros((grid.size, grid.size))
    for i in np.flatnonzero(P > 0):
        t = int(targets[i])
        dist = norm(pi0.spec, grid.points - grid.points[t])
        inside = dist <= delta_radius * (1 + 1e-12)
        row = np.where(inside, pi0.conditional[i], 0.0)
        mass = row.sum()
        if mass > 0:
            W[i] = P[i] * row / mass
        else:
            W[i, t] = P[i]
    return Coupling(grid, W, first=pi0.first)


def log_normalizers(pi0: ReferenceCoupling) -> np.ndarray:
    """log I_sigma(x_i), the Gibbs kernel integral as grid sum times cell volume."""
    logk = gibbs_log_kernel(pi0.spec, pi0.grid, pi0.sigma)
    mx = logk.max(axis=1)
    return mx + np.log(np.exp(logk - mx[:, None]).sum(axis=1)) + math.log(pi0.grid.cell_volume)


def gibbs_integral(spec, dim: int, sigma: float) -> float:
    """Integral over R^d of exp(-||y||^p / (2^(p-1) sigma))."""
    unit_ball = {1: {"l1": 2.0, "l2": 2.0, "linf": 2.0},
                 2: {"l1": 2.0, "l2": math.pi, "linf": 4.0}}[dim][spec.norm]
    a = 2 ** (spec.p - 1) * sigma
    return unit_ball * gamma(1 + dim / spec.p) * a ** (dim / spec.p)


class GapCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool
    block_lagrangian: float  # value of the block coupling in the entropic Lagrangian
    entropic_lagrangian: float


def lagrangian_gap_check(prob: ProblemSpec, reg: RegParams, pi0: ReferenceCoupling, lam: float,
                         delta_radius: float, slack: float = 1e-3) -> GapCheck:
    """Compare the cost-regularized and entropic Lagrangians at a fixed multiplier.

    lhs is sup_pi E_pi[f - lam c] - (beta / sigma) E_pi c with beta = eps + lam delta;
    rhs is the entropic Lagrangian plus the Lipschitz, volume and normalizer
    terms of the bound. Neither side includes lam * rho.
    """
    if not delta_radius > 0:
        raise ValueError(f"delta_radius must be > 0, got {delta_radius}")
    sigma = pi0.sigma
    beta = reg.eps + lam * reg.delta
    grid = prob.grid
    rows = prob.rows
    Pw = prob.P.weights[rows]
    coef = lam + beta / sigma
    R = prob.f[None, :] - coef * prob.C[rows]
    targets_rows = np.argmax(R, axis=1)
    lhs = math.fsum(Pw * R[np.arange(len(rows)), targets_rows])

    vals, _ = _row_lse(prob, pi0, lam, beta)
    F = math.fsum(Pw * vals)

    Lf = lipschitz_estimate(grid, prob.f)
    Lc = cost_lipschitz(prob.cost, grid)
    V = volume_constant(grid, prob.cost.norm)
    logI = math.fsum(Pw * log_normalizers(pi0)[rows])
    d = grid.dim
    rhs = F + (Lf + lam * Lc) * delta_radius + beta * (
        delta_radius ** prob.cost.p / sigma - math.log(V * delta_radius ** d) + logI
    )

    targets = np.zeros(grid.size, dtype=int)
    targets[rows] = targets_rows
    block = block_approximation(targets, pi0, delta_radius)
    h = prob.f[None, :] - lam * prob.C
    block_val = math.fsum((block.weights * h).ravel()) - beta * kl_divergence(block, pi0.coupling)
    return GapCheck(lhs, rhs, lhs <= rhs + slack * (1 + abs(rhs)), block_val, F)


def optimal_radius(prob: ProblemSpec, reg: RegParams, pi0: ReferenceCoupling) -> float:
    """Delta = (eps + lambda_bar delta) d / (L(f) + lambda_bar L(c))."""
    lbar = lambda_bar(prob, pi0)
    L = lipschitz_estimate(prob.grid, prob.f) + lbar * cost_lipschitz(prob.cost, prob.grid)
    return (reg.eps + lbar * reg.delta) * prob.grid.dim / L


class SweepRow(NamedTuple):
    eps: float
    delta: float
    lambda_star: float
    lambda_bar: float
    value_entropic: float
    value_unreg: float
    gap: float
    eta: float


SWEEP_HEADER = SweepRow._fields


@dataclass(frozen=True)
class SweepReport:
    rows: list[SweepRow]
    dim: int
    c_fit: float
    rate_ratios: list[float] = field(default_factory=list)

    def __post_init__(self):
        for r in self.rows:
            if r.gap < -1e-8:
                raise AssertionError(f"negative approximation gap {r.gap} at eps={r.eps}, delta={r.delta}")
            if not r.eta > 0:
                raise AssertionError("eta must be > 0")

    @property
    def ratio_spread(self) -> float:
        """max / min of gap / (d eta log(1/eta)) over the fitted rows."""
        pos = [r for r in self.rate_ratios if r > 0]
        return max(pos) / min(pos) if pos else math.nan


def _rate(d: int, eta: float) -> float:
    return d * eta * math.log(1 / eta)


def sweep(prob: ProblemSpec, pi0: ReferenceCoupling, eps_list: Sequence[float],
          delta_list: Sequence[float]) -> SweepReport:
    """Entropic-vs-unregularized gap for each (eps, delta) pair.

    ``eps_list`` and ``delta_list`` are zipped; a length-1 list is broadcast.
    """
    eps_list, delta_list = list(eps_list), list(delta_list)
    if len(eps_list) == 1 and len(delta_list) > 1:
        eps_list = eps_list * len(delta_list)
    if len(delta_list) == 1 and len(eps_list) > 1:
        delta_list = delta_list * len(eps_list)
    if len(eps_list) != len(delta_list):
        raise ValueError("eps_list and delta_list must have equal length (or length 1)")
    if not eps_list:
        return SweepReport([], prob.grid.dim, math.nan)
    f00 = solve_cost_reg(prob).value
    lbar = lambda_bar(prob, pi0)

    def one(pair):
        e, dl = pair
        sol = solve_entropic(prob, RegParams(e, dl, pi0.sigma), pi0)
        return SweepRow(e, dl, sol.lambda_star, lbar, sol.value, f00, f00 - sol.value, e + lbar * dl)

    rows = ordered_map(one, zip(eps_list, delta_list))
    d = prob.grid.dim
    ratios = [r.gap / _rate(d, r.eta) for r in rows if r.eta < 1 / math.e]
    c_fit = max(ratios) if ratios else math.nan
    return SweepReport(rows, d, c_fit, ratios)


class RadiusComparison(NamedTuple):
    value_rho: float
    value_shrunk: float
    bound: float
    bound_holds: bool


def _unreg_value(prob: ProblemSpec) -> float:
    if prob.grid.size <= LP_MAX_POINTS:
        return primal_lp_unreg(prob)[0]
    return solve_cost_reg(prob).value


def radius_compare(prob: ProblemSpec, pi0: ReferenceCoupling, delta: float,
                   sigma: float | None = None) -> RadiusComparison:
    """Unregularized values at radii rho and rho / (1 + delta / sigma).

    The bound is L(f) (t^p rho)^(1/p) with t = 1 - (1 + delta/sigma)^(-1/p).
    """
    sigma = pi0.sigma if sigma is None else sigma
    p = prob.cost.p
    shrunk = prob.rho / (1 + delta / sigma)
    v_rho = _unreg_value(prob)
    v_shrunk = v_rho if delta == 0 else _unreg_value(prob.with_rho(shrunk))
    t = 1 - (1 + delta / sigma) ** (-1 / p)
    bound = lipschitz_estimate(prob.grid, prob.f) * (t ** p * prob.rho) ** (1 / p)
    diff = v_rho - v_shrunk
    return RadiusComparison(v_rho, v_shrunk, bound, -1e-8 <= diff <= bound + 1e-8)


def explicit_lower_bound(prob: ProblemSpec, reg: RegParams, pi0: ReferenceCoupling) -> dict:
    """Explicit lower bound on the entropic value with continuum constants.

    Reported for reference only: the constants are continuum quantities and
    the grid perturbs them.
    """
    sigma, d, p = pi0.sigma, prob.grid.dim, prob.cost.p
    lbar = lambda_bar(prob, pi0)
    eta = reg.eps + lbar * reg.delta
    L = lipschitz_estimate(prob.grid, prob.f) + lbar * cost_lipschitz(prob.cost, prob.grid)
    V = volume_constant(prob.grid, prob.cost.norm)
    C = min(math.log(prob.grid.volume / V), math.log(gibbs_integral(prob.cost, d, sigma) / V))
    shrunk = _unreg_value(prob.with_rho(prob.rho / (1 + reg.delta / sigma)))
    penalty = eta * (d + d * math.log(L / (eta * d)) + C + (eta * d / L) ** p / sigma)
    return {
        "lower_bound": shrunk - penalty - reg.eps * prob.rho / (sigma + reg.delta),
        "value_shrunk": shrunk,
        "eta": eta,
        "L": L,
        "V": V,
        "C": C,
    }
