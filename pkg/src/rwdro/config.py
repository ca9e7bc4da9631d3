"""JSON run configuration: parsing, validation and problem construction."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .costs import NORMS, CostSpec, build_reference, calibrate_sigma
from .dual import ProblemSpec
from .errors import ConfigError
from .measures import Grid, load_empirical, read_samples_csv
from .objectives import OBJECTIVES, make_distribution, make_objective

METHODS = ("unreg", "cost-reg", "entropic", "phi")
DISTRIBUTIONS = ("uniform", "dirac", "empirical", "normal", "random", "weights")

_TOP_KEYS = {"domain", "distribution", "objective", "cost", "rho", "reg", "method", "phi",
             "sweep", "seed", "output"}


@dataclass
class RunConfig:
    domain: dict
    distribution: dict
    objective: dict
    cost: dict
    rho: float
    reg: dict = field(default_factory=lambda: {"eps": 0.01, "delta": 0.01, "sigma": "auto"})
    method: str = "entropic"
    phi: str = "kl"
    sweep: dict = field(default_factory=lambda: {"eps": [0.1, 0.01, 0.001, 0.0001], "delta": [0.0]})
    seed: int = 0
    output: str = "out"
    base_dir: Path = field(default=Path("."), repr=False)

    def to_dict(self) -> dict:
        return {
            "domain": self.domain, "distribution": self.distribution, "objective": self.objective,
            "cost": self.cost, "rho": self.rho, "reg": self.reg, "method": self.method,
            "phi": self.phi, "sweep": self.sweep, "seed": self.seed, "output": self.output,
        }


def _only(d: Any, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key {extra[0]!r}")


def _num(x, key: str, positive=False, nonneg=False) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{key}: expected a finite number, got {x!r}")
    if positive and not x > 0:
        raise ConfigError(f"{key}: must be > 0, got {x!r}")
    if nonneg and x < 0:
        raise ConfigError(f"{key}: must be >= 0, got {x!r}")
    return float(x)


def parse_config(doc: dict, base_dir: str | Path = ".") -> RunConfig:
    """Validate a whole config document before anything is solved."""
    _only(doc, _TOP_KEYS, "config")
    for key in ("domain", "distribution", "objective", "cost", "rho"):
        if key not in doc:
            raise ConfigError(f"{key}: missing")

    dom = doc["domain"]
    _only(dom, {"bounds", "points_per_axis", "dim"}, "domain")
    bounds = dom.get("bounds")
    if not isinstance(bounds, list) or not bounds or not all(
            isinstance(b, list) and len(b) == 2 for b in bounds):
        raise ConfigError("domain.bounds: expected a list of [lo, hi] pairs")
    for k, (lo, hi) in enumerate(bounds):
        if not _num(lo, f"domain.bounds[{k}]") < _num(hi, f"domain.bounds[{k}]"):
            raise ConfigError(f"domain.bounds[{k}]: lo must be < hi")
    if len(bounds) not in (1, 2):
        raise ConfigError("domain.bounds: dimension must be 1 or 2")
    if "dim" in dom and dom["dim"] != len(bounds):
        raise ConfigError("domain.dim: does not match the number of bounds")
    ppa = dom.get("points_per_axis")
    if isinstance(ppa, bool) or not isinstance(ppa, int) or ppa < 2:
        raise ConfigError("domain.points_per_axis: expected an integer >= 2")

    dist = doc["distribution"]
    _only(dist, {"name", "params", "csv"}, "distribution")
    if ("csv" in dist) == ("name" in dist):
        raise ConfigError("distribution: give exactly one of 'name' or 'csv'")
    if "name" in dist and dist["name"] not in DISTRIBUTIONS:
        raise ConfigError(f"distribution.name: unknown {dist['name']!r}")

    obj = doc["objective"]
    _only(obj, {"name", "params", "values"}, "objective")
    if ("values" in obj) == ("name" in obj):
        raise ConfigError("objective: give exactly one of 'name' or 'values'")
    if "name" in obj and obj["name"] not in OBJECTIVES:
        raise ConfigError(f"objective.name: unknown {obj['name']!r}")

    cost = doc["cost"]
    _only(cost, {"norm", "p"}, "cost")
    if cost.get("norm", "l2") not in NORMS:
        raise ConfigError(f"cost.norm: must be one of {NORMS}")
    if _num(cost.get("p", 1.0), "cost.p") < 1:
        raise ConfigError("cost.p: must be >= 1")

    rho = _num(doc["rho"], "rho", positive=True)

    reg = dict(RunConfig.__dataclass_fields__["reg"].default_factory())
    reg.update(doc.get("reg", {}))
    _only(reg, {"eps", "delta", "sigma"}, "reg")
    _num(reg["eps"], "reg.eps", nonneg=True)
    _num(reg["delta"], "reg.delta", nonneg=True)
    if reg["sigma"] != "auto":
        _num(reg["sigma"], "reg.sigma", positive=True)

    method = doc.get("method", "entropic")
    if method not in METHODS:
        raise ConfigError(f"method: must be one of {METHODS}, got {method!r}")
    phi = doc.get("phi", "kl")
    if phi not in ("kl", "chi2"):
        raise ConfigError(f"phi: must be 'kl' or 'chi2', got {phi!r}")

    sweep = dict(RunConfig.__dataclass_fields__["sweep"].default_factory())
    sweep.update(doc.get("sweep", {}))
    _only(sweep, {"eps", "delta"}, "sweep")
    for key in ("eps", "delta"):
        if not isinstance(sweep[key], list):
            raise ConfigError(f"sweep.{key}: expected a list")
        for v in sweep[key]:
            _num(v, f"sweep.{key}", nonneg=True)

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed: expected an integer")
    output = doc.get("output", "out")
    if not isinstance(output, str):
        raise ConfigError("output: expected a path string")

    cfg = RunConfig(dom, dist, obj, cost, rho, reg, method, phi, sweep, seed, output, Path(base_dir))
    build_problem(cfg)  # surfaces remaining errors (bad params, out-of-bounds samples) up front
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(doc, path.parent)


def build_problem(cfg: RunConfig) -> ProblemSpec:
    bounds = tuple(tuple(float(v) for v in b) for b in cfg.domain["bounds"])
    grid = Grid(bounds, cfg.domain["points_per_axis"])
    dist = cfg.distribution
    try:
        if "csv" in dist:
            rows = read_samples_csv(cfg.base_dir / dist["csv"], grid.dim)
            P = load_empirical(grid, rows)
        else:
            rng = np.random.default_rng(cfg.seed)
            P = make_distribution(grid, dist["name"], rng=rng, **dist.get("params", {}))
    except (ValueError, KeyError, TypeError, OSError) as e:
        raise ConfigError(f"distribution: {e}") from e
    obj = cfg.objective
    try:
        if "values" in obj:
            f = np.asarray(obj["values"], dtype=float)
        else:
            f = make_objective(grid, obj["name"], **obj.get("params", {}))
        cost = CostSpec(cfg.cost.get("norm", "l2"), float(cfg.cost.get("p", 1.0)))
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"objective: {e}") from e
    try:
        return ProblemSpec(grid, P, f, cost, cfg.rho)
    except ValueError as e:
        raise ConfigError(f"objective: {e}") from e


def resolve_sigma(cfg: RunConfig, prob: ProblemSpec) -> float:
    s = cfg.reg["sigma"]
    return calibrate_sigma(prob.P, prob.cost, prob.rho) if s == "auto" else float(s)


def build_reference_from(cfg: RunConfig, prob: ProblemSpec):
    return build_reference(prob.P, prob.cost, resolve_sigma(cfg, prob))
