"""Grids, discrete measures and couplings on a box-shaped sample space."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

WEIGHT_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform Cartesian grid on a box in R^d, d in {1, 2}.

    Points are ordered lexicographically (first coordinate slowest).
    """

    bounds: tuple[tuple[float, float], ...]
    points_per_axis: int
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(bounds) not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {len(bounds)}")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"empty axis interval [{lo}, {hi}]")
        if int(self.points_per_axis) < 2:
            raise ValueError("points_per_axis must be >= 2")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "points_per_axis", int(self.points_per_axis))
        axes = [np.linspace(lo, hi, self.points_per_axis) for lo, hi in bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / (self.points_per_axis - 1) for lo, hi in self.bounds])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.bounds]))

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum((hi - lo) ** 2 for lo, hi in self.bounds)))

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return all(lo - tol <= xi <= hi + tol for xi, (lo, hi) in zip(x, self.bounds))

    def index_of(self, x) -> int:
        """Index of the grid point nearest to ``x`` (ties go to the smaller index)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d2 = np.sum((self.points - x) ** 2, axis=1)
        return int(np.argmin(d2))

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.bounds == other.bounds and self.points_per_axis == other.points_per_axis
        )


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    grid: Grid
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights).ravel()
        if w.shape[0] != self.grid.size:
            raise ValueError(f"expected {self.grid.size} weights, got {w.shape[0]}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        total = math.fsum(w)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", w)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    @classmethod
    def dirac(cls, grid: Grid, index: int) -> "DiscreteMeasure":
        w = np.zeros(grid.size)
        w[index] = 1.0
        return cls(grid, w)

    @classmethod
    def uniform(cls, grid: Grid) -> "DiscreteMeasure":
        return cls(grid, np.full(grid.size, 1.0 / grid.size))


@dataclass(frozen=True, eq=False)
class Coupling:
    """Joint weights ``w[i, j]`` from source point i to target point j.

    If ``first`` is given, the row sums are checked against it.
    """

    grid: Grid
    weights: np.ndarray
    first: DiscreteMeasure | None = None

    def __post_init__(self):
        w = _frozen(self.weights)
        n = self.grid.size
        if w.shape != (n, n):
            raise ValueError(f"coupling must be {n}x{n}, got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("coupling weights must be finite and nonnegative")
        total = math.fsum(w.ravel())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"coupling weights sum to {total!r}, not 1")
        if self.first is not None:
            err = np.max(np.abs(w.sum(axis=1) - self.first.weights))
            if err > WEIGHT_TOL:
                raise ValueError(f"first marginal off by {err:.3e}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def product(cls, p: DiscreteMeasure, q: DiscreteMeasure) -> "Coupling":
        return cls(p.grid, np.outer(p.weights, q.weights))

    @classmethod
    def diagonal(cls, p: DiscreteMeasure) -> "Coupling":
        return cls(p.grid, np.diag(p.weights), first=p)


def renormalize(weights) -> np.ndarray:
    """Scale nonnegative weights to unit total. Never applied implicitly."""
    w = np.asarray(weights, dtype=float)
    total = math.fsum(w.ravel())
    if total <= 0:
        raise ValueError("cannot renormalize zero mass")
    return w / total


def marginal(coupling: Coupling, axis: str = "first") -> DiscreteMeasure:
    if axis == "first":
        w = coupling.weights.sum(axis=1)
    elif axis == "second":
        w = coupling.weights.sum(axis=0)
    else:
        raise ValueError(f"axis must be 'first' or 'second', got {axis!r}")
    return DiscreteMeasure(coupling.grid, w)


def expectation(measure: DiscreteMeasure, values) -> float:
    v = np.asarray(values, dtype=float).ravel()
    if v.shape[0] != measure.weights.shape[0]:
        raise ValueError(f"values length {v.shape[0]} != grid size {measure.weights.shape[0]}")
    return math.fsum(measure.weights * v)


def kl_divergence(num: Coupling, base: Coupling) -> float:
    """KL(num | base) with 0 log 0 = 0; +inf when num is not absolutely continuous."""
    if not num.grid.same_as(base.grid):
        raise ValueError("couplings live on different grids")
    return kl_weights(num.weights, base.weights)


def kl_weights(w: np.ndarray, b: np.ndarray) -> float:
    w = np.asarray(w, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    pos = w > 0
    if np.any(b[pos] <= 0):
        return math.inf
    return math.fsum(w[pos] * np.log(w[pos] / b[pos]))


def load_empirical(grid: Grid, rows: Sequence[Sequence[float]]) -> DiscreteMeasure:
    """Empirical measure of ``rows``, each sample snapped to its nearest grid point."""
    rows = [np.atleast_1d(np.asarray(r, dtype=float)) for r in rows]
    if not rows:
        raise ValueError("no samples")
    counts = np.zeros(grid.size)
    for k, r in enumerate(rows):
        if r.shape != (grid.dim,):
            raise ValueError(f"row {k}: expected {grid.dim} coordinates, got {r.shape[0]}")
        if not grid.contains(r):
            raise ValueError(f"row {k}: sample {r.tolist()} outside grid bounds {grid.bounds}")
        counts[grid.index_of(r)] += 1
    return DiscreteMeasure(grid, counts / len(rows))


def read_samples_csv(path: str | Path, dim: int) -> list[list[float]]:
    """One sample per line, ``dim`` comma-separated fields; lines starting with '#' are skipped."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != dim:
            raise ValueError(f"{path}:{lineno}: expected {dim} fields, got {len(fields)}")
        rows.append([float(x) for x in fields])
    return rows
