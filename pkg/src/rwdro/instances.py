"""Shipped and randomly generated test problems."""
from __future__ import annotations

import numpy as np

from .costs import CostSpec, build_reference, calibrate_sigma
from .dual import ProblemSpec
from .measures import DiscreteMeasure, Grid
from .objectives import make_distribution, make_objective

SHIPPED_CONFIG = {
    "domain": {"bounds": [[0.0, 1.0]], "points_per_axis": 33},
    "distribution": {"name": "normal", "params": {"mean": 0.4, "std": 0.15}},
    "objective": {"name": "pwl", "params": {"breakpoints": [0.0, 0.3, 0.6, 1.0],
                                            "values": [0.0, 0.8, 0.2, 1.0]}},
    "cost": {"norm": "l2", "p": 1.0},
    "rho": 0.1,
    "reg": {"eps": 0.01, "delta": 0.01, "sigma": "auto"},
}

TWO_POINT_CONFIG = {
    "domain": {"bounds": [[0.0, 1.0]], "points_per_axis": 2},
    "distribution": {"name": "dirac", "params": {"point": [0.0]}},
    "objective": {"name": "linear", "params": {"slope": 1.0}},
    "cost": {"norm": "l2", "p": 1.0},
    "rho": 0.3,
}


def two_point() -> ProblemSpec:
    """Xi = {0, 1}, P = delta_0, f(y) = y, c = |x - y|, rho = 0.3. Optimal value 0.3 at lam* = 1."""
    g = Grid(((0.0, 1.0),), 2)
    return ProblemSpec(g, DiscreteMeasure.dirac(g, 0), g.points[:, 0], CostSpec("l2", 1.0), 0.3)


def shipped() -> ProblemSpec:
    """33-point instance on [0, 1]: discretized normal P, piecewise-linear f, c = |x - y|, rho = 0.1."""
    c = SHIPPED_CONFIG
    g = Grid(tuple(tuple(b) for b in c["domain"]["bounds"]), c["domain"]["points_per_axis"])
    P = make_distribution(g, c["distribution"]["name"], **c["distribution"]["params"])
    f = make_objective(g, c["objective"]["name"], **c["objective"]["params"])
    return ProblemSpec(g, P, f, CostSpec(**c["cost"]), c["rho"])


def shipped_reference(prob: ProblemSpec | None = None):
    prob = shipped() if prob is None else prob
    return build_reference(prob.P, prob.cost, calibrate_sigma(prob.P, prob.cost, prob.rho))


def random_problem(rng: np.random.Generator, n_points: int = 9, dim: int = 1, p: float | None = None,
                   norm: str = "l2", rho: float | None = None, sparse_p: bool = False) -> ProblemSpec:
    """Random instance on [0, 1]^dim with Dirichlet P, Gaussian f and random radius."""
    g = Grid(((0.0, 1.0),) * dim, n_points)
    w = rng.dirichlet(np.ones(g.size))
    if sparse_p:
        keep = rng.random(g.size) < 0.5
        keep[rng.integers(g.size)] = True
        w = np.where(keep, w, 0.0)
    P = DiscreteMeasure(g, w / w.sum())
    f = rng.normal(size=g.size)
    p = float(rng.choice([1.0, 2.0])) if p is None else p
    rho = float(rng.uniform(0.05, 0.3)) if rho is None else rho
    return ProblemSpec(g, P, f, CostSpec(norm, p), rho)


def random_instance_config(seed: int, n_points: int = 9) -> dict:
    """Config document for a seeded random instance (used by ``gen-instance``)."""
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, n_points)
    return {
        "domain": {"bounds": [[0.0, 1.0]], "points_per_axis": n_points},
        "distribution": {"name": "weights", "params": {"weights": prob.P.weights.tolist()}},
        "objective": {"values": prob.f.tolist()},
        "cost": {"norm": prob.cost.norm, "p": prob.cost.p},
        "rho": prob.rho,
        "reg": {"eps": 0.01, "delta": 0.01, "sigma": "auto"},
        "method": "entropic",
        "seed": seed,
    }
