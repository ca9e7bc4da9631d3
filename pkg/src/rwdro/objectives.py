"""Built-in objective functions and reference distributions, tabulated on a grid."""
from __future__ import annotations

import numpy as np

from .measures import DiscreteMeasure, Grid, load_empirical, renormalize


def _vec(x, d):
    return np.broadcast_to(np.asarray(x, dtype=float), (d,))


def linear(grid: Grid, slope=1.0, intercept=0.0):
    return grid.points @ _vec(slope, grid.dim) + intercept


def quadratic(grid: Grid, a=1.0, center=0.0, b=0.0):
    return a * np.sum((grid.points - _vec(center, grid.dim)) ** 2, axis=1) + b


def sine(grid: Grid, amplitude=1.0, frequency=1.0, phase=0.0):
    return amplitude * np.sin(frequency * grid.points.sum(axis=1) + phase)


def absolute(grid: Grid, a=1.0, center=0.0):
    return a * np.sum(np.abs(grid.points - _vec(center, grid.dim)), axis=1)


def piecewise_linear(grid: Grid, breakpoints=(0.0, 1.0), values=(0.0, 1.0)):
    """Linear interpolation through (breakpoints, values) along the first coordinate."""
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or len(bp) < 2 or np.any(np.diff(bp) <= 0):
        raise ValueError("breakpoints must be strictly increasing with at least two entries")
    return np.interp(grid.points[:, 0], bp, np.asarray(values, dtype=float))


OBJECTIVES = {
    "linear": linear,
    "quadratic": quadratic,
    "sine": sine,
    "abs": absolute,
    "pwl": piecewise_linear,
}


def make_objective(grid: Grid, name: str, **params) -> np.ndarray:
    if name not in OBJECTIVES:
        raise KeyError(f"unknown objective {name!r}; choose from {sorted(OBJECTIVES)}")
    return np.asarray(OBJECTIVES[name](grid, **params), dtype=float)


def make_distribution(grid: Grid, name: str, rng: np.random.Generator | None = None,
                      **params) -> DiscreteMeasure:
    if name == "uniform":
        return DiscreteMeasure.uniform(grid)
    if name == "dirac":
        point = params.get("point", grid.points[0])
        if len(np.atleast_1d(point)) != grid.dim or not grid.contains(point):
            raise ValueError(f"dirac point {point} outside grid bounds")
        return DiscreteMeasure.dirac(grid, grid.index_of(point))
    if name == "empirical":
        return load_empirical(grid, params["samples"])
    if name == "normal":
        mean = _vec(params.get("mean", 0.5), grid.dim)
        std = float(params.get("std", 0.2))
        dens = np.exp(-0.5 * np.sum((grid.points - mean) ** 2, axis=1) / std ** 2)
        return DiscreteMeasure(grid, renormalize(dens))
    if name == "random":
        rng = rng if rng is not None else np.random.default_rng(params.get("seed", 0))
        return DiscreteMeasure(grid, renormalize(rng.dirichlet(np.full(grid.size, params.get("alpha", 1.0)))))
    if name == "weights":
        return DiscreteMeasure(grid, params["weights"])
    raise KeyError(f"unknown distribution {name!r}")
