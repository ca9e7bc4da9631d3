"""Derivative-free minimization of a convex function of one variable."""
from __future__ import annotations

import math
from typing import Callable, NamedTuple

INVPHI = (math.sqrt(5) - 1) / 2


class GoldenResult(NamedTuple):
    x: float
    fx: float
    lo: float
    hi: float
    evaluations: int


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9,
                   max_iter: int = 500) -> GoldenResult:
    """Minimize a unimodal ``f`` on [a, b].

    Stops once the bracket is narrower than ``tol``. The returned point is the
    best one probed, endpoints included, so a minimizer sitting on the
    boundary is found exactly.
    """
    if b < a:
        raise ValueError("empty interval")
    fa, fb = f(a), f(b)
    best = min((fa, a), (fb, b))
    n = 2
    if b - a <= tol:
        return GoldenResult(best[1], best[0], a, b, n)
    x1 = b - INVPHI * (b - a)
    x2 = a + INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    n += 2
    best = min(best, (f1, x1), (f2, x2))
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INVPHI * (b - a)
            f1 = f(x1)
            best = min(best, (f1, x1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INVPHI * (b - a)
            f2 = f(x2)
            best = min(best, (f2, x2))
        n += 1
    return GoldenResult(best[1], best[0], a, b, n)


def bisect_sign(g: Callable[[float], float], lo: float, hi: float, tol: float = 0.0,
                max_iter: int = 200) -> float:
    """Smallest-bracket point ``hi`` with g(hi) >= 0 for nondecreasing g, g(lo) < 0 <= g(hi)."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or hi - lo <= tol:
            break
        if g(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi
