"""Command-line front end.

Exit status: 0 on success, 1 when the problem is infeasible for the chosen
reference coupling, 2 on configuration errors, 3 when ``verify`` finds a
failing check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .approx import (SWEEP_HEADER, SweepReport, explicit_lower_bound, lagrangian_gap_check, optimal_radius,
                     radius_compare, sweep)
from .config import RunConfig, build_problem, build_reference_from, load_config, parse_config
from .costs import expected_cost
from .dual import LP_MAX_POINTS, primal_lp_unreg, solve_cost_reg
from .entropic import RegParams, lambda_bar, solve_entropic
from .errors import ConfigError, InfeasibleError
from .instances import random_instance_config
from .measures import DiscreteMeasure
from .ot import sinkhorn, sinkhorn_dual_value, wasserstein_exact
from .phi import PhiSpec, solve_phi_dual

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    return x


def write_json(obj, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def emit_report(report: SweepReport, path) -> Path:
    """Write the sweep as CSV with 17 significant digits per float."""
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in report.rows:
        w.writerow([fmt(v) for v in row])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())
    return path


def solve(cfg: RunConfig) -> dict:
    prob = build_problem(cfg)
    eps, delta = float(cfg.reg["eps"]), float(cfg.reg["delta"])
    out = {"method": cfg.method, "rho": prob.rho, "seed": cfg.seed}
    if cfg.method in ("unreg", "cost-reg"):
        if cfg.method == "unreg":
            eps = delta = 0.0
        sol = solve_cost_reg(prob, eps, delta)
        gap = math.nan
        if cfg.method == "unreg" and prob.grid.size <= LP_MAX_POINTS:
            gap = sol.value - primal_lp_unreg(prob)[0]
        out.update(value=sol.value, lambda_star=sol.lambda_star, lambda_bound=sol.lambda_bound,
                   gap=gap, eps=eps, delta=delta, inner_argmax=list(sol.inner_argmax))
        return out
    pi0 = build_reference_from(cfg, prob)
    out.update(eps=eps, delta=delta, sigma=pi0.sigma,
               expected_cost_pi0=expected_cost(pi0.coupling, prob.cost))
    if cfg.method == "entropic":
        sol = solve_entropic(prob, RegParams(eps, delta, pi0.sigma), pi0)
        out.update(value=sol.value, lambda_star=sol.lambda_star, lambda_bar=sol.dual.lambda_bound,
                   lambda_bound=sol.dual.lambda_bound, gap=sol.duality_gap,
                   primal_value=sol.primal_value, slack=sol.feasibility_slack,
                   complementary=sol.lambda_star * abs(sol.feasibility_slack),
                   inner_argmax=list(sol.dual.inner_argmax))
    else:
        sol = solve_phi_dual(prob, eps, delta, pi0, PhiSpec(cfg.phi))
        out.update(value=sol.value, lambda_star=sol.lambda_star, lambda_bound=sol.lambda_bound,
                   gap=math.nan, residual=sol.residual, phi=cfg.phi,
                   inner_argmax=list(sol.inner_argmax))
        if cfg.phi == "kl":
            out["lambda_bar"] = lambda_bar(prob, pi0)
    return out


def validate_solution(doc: dict) -> dict:
    """Re-check the invariants of an emitted solution document."""
    lam, bound, value = doc["lambda_star"], doc["lambda_bound"], doc["value"]
    if not (0 <= lam <= bound):
        raise ValueError(f"lambda_star {lam} outside [0, {bound}]")
    if value is None or not math.isfinite(value):
        raise ValueError("value is not finite")
    if "slack" in doc and doc["slack"] < -1e-8:
        raise ValueError(f"infeasible recovered coupling (slack {doc['slack']})")
    if "lambda_bar" in doc and lam > doc["lambda_bar"] + 1e-9:
        raise ValueError("lambda_star exceeds lambda_bar")
    return doc


def load_solution(path) -> dict:
    return validate_solution(json.loads(Path(path).read_text()))


def _summary(doc: dict) -> str:
    gap = doc["gap"]
    gap = "n/a" if gap is None or not math.isfinite(gap) else f"{gap:.3g}"
    return f"value={doc['value']:.10g} lambda_star={doc['lambda_star']:.10g} gap={gap}"


def run_sweep(cfg: RunConfig) -> SweepReport:
    prob = build_problem(cfg)
    pi0 = build_reference_from(cfg, prob)
    return sweep(prob, pi0, cfg.sweep["eps"], cfg.sweep["delta"])


def verify(cfg: RunConfig) -> list[dict]:
    """Fixed-multiplier Lagrangian bound and radius comparison on the configured instance."""
    prob = build_problem(cfg)
    pi0 = build_reference_from(cfg, prob)
    reg = RegParams(float(cfg.reg["eps"]), float(cfg.reg["delta"]), pi0.sigma)
    rows = []
    if reg.eps + reg.delta > 0:  # the entropic Lagrangian needs a positive temperature
        lbar = lambda_bar(prob, pi0)
        radius = optimal_radius(prob, reg, pi0)
        for lam in (0.0, lbar / 2, lbar):
            chk = lagrangian_gap_check(prob, reg, pi0, lam, radius)
            rows.append({"check": "lagrangian", "param": lam, "lhs": chk.lhs, "rhs": chk.rhs,
                         "pass": bool(chk.holds)})
    for ratio in (0.1, 0.5):
        rc = radius_compare(prob, pi0, ratio * pi0.sigma)
        rows.append({"check": "radius", "param": ratio, "lhs": rc.value_rho - rc.value_shrunk,
                     "rhs": rc.bound, "pass": bool(rc.bound_holds)})
    if reg.eps + reg.delta > 0:
        ent = solve_entropic(prob, reg, pi0)
        tb = explicit_lower_bound(prob, reg, pi0)
        rows.append({"check": "extended_bound", "param": tb["eta"], "lhs": tb["lower_bound"],
                     "rhs": ent.value, "pass": bool(tb["lower_bound"] <= ent.value + 1e-8)})
    return rows


def oracle(cfg: RunConfig) -> dict:
    """Cross-check the dual solver against the LP and Sinkhorn against exact OT."""
    prob = build_problem(cfg)
    out: dict = {}
    dual = solve_cost_reg(prob)
    out["dual_value"] = dual.value
    if prob.grid.size <= LP_MAX_POINTS:
        out["lp_value"] = primal_lp_unreg(prob)[0]
        out["strong_duality_gap"] = dual.value - out["lp_value"]
    Q = DiscreteMeasure.uniform(prob.grid)
    if len(prob.P.support) <= 64 and prob.grid.size <= 64:
        out["wasserstein_to_uniform"] = wasserstein_exact(prob.P, Q, prob.cost).value
    eps = float(cfg.reg["eps"]) or 0.01
    sk = sinkhorn(prob.P, Q, prob.cost, eps)
    out.update(sinkhorn_eps=eps, sinkhorn_primal=sk.value,
               sinkhorn_dual=sinkhorn_dual_value(prob.P, Q, prob.cost, eps, sk.potential),
               sinkhorn_marginal_error=sk.marginal_error, sinkhorn_converged=sk.converged)
    return out


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    doc = cfg.to_dict()
    if getattr(args, "rho", None) is not None:
        doc["rho"] = args.rho
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "output", None) is not None:
        doc["output"] = args.output
    if getattr(args, "method", None) is not None:
        doc["method"] = args.method
    if getattr(args, "phi", None) is not None:
        doc["phi"] = args.phi
    reg = dict(doc["reg"])
    eps = getattr(args, "eps", None)
    if eps is not None:
        if args.command == "sweep":
            doc["sweep"] = dict(doc["sweep"], eps=eps)
        else:
            reg["eps"] = eps[0] if isinstance(eps, list) else eps
    if getattr(args, "delta", None) is not None:
        if args.command == "sweep":
            doc["sweep"] = dict(doc["sweep"], delta=args.delta)
        else:
            reg["delta"] = args.delta[0] if isinstance(args.delta, list) else args.delta
    if getattr(args, "sigma", None) is not None:
        reg["sigma"] = args.sigma if args.sigma == "auto" else float(args.sigma)
    doc["reg"] = reg
    return parse_config(doc, cfg.base_dir)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rwdro", description="Regularized Wasserstein DRO on grids")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, multi_eps=False):
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--rho", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--output", help="output directory")
        if multi_eps:
            p.add_argument("--eps", type=float, nargs="+")
            p.add_argument("--delta", type=float, nargs="+")
        else:
            p.add_argument("--eps", type=float)
            p.add_argument("--delta", type=float)
        p.add_argument("--sigma", help="positive number or 'auto'")

    p = sub.add_parser("solve", help="solve one instance")
    common(p)
    p.add_argument("--method", choices=("unreg", "cost-reg", "entropic", "phi"))
    p.add_argument("--phi", choices=("kl", "chi2"))
    common(sub.add_parser("sweep", help="entropic approximation gap over (eps, delta)"), multi_eps=True)
    common(sub.add_parser("verify", help="Lagrangian and radius-comparison diagnostics"))
    common(sub.add_parser("oracle", help="LP and Sinkhorn cross-checks"))
    g = sub.add_parser("gen-instance", help="write a seeded random instance config")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--points", type=int, default=9)
    g.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "gen-instance":
            write_json(random_instance_config(args.seed, args.points), Path(args.out))
            print(f"wrote {args.out}")
            return EXIT_OK
        cfg = _apply_overrides(load_config(args.config), args)
        return run(cfg, args.command)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE


def run(cfg: RunConfig, command: str = "solve") -> int:
    """Dispatch a parsed configuration; writes artifacts under ``cfg.output``."""
    out_dir = Path(cfg.output)
    if not out_dir.is_absolute():
        out_dir = cfg.base_dir / out_dir
    try:
        if command == "solve":
            doc = solve(cfg)
            doc["config"] = cfg.to_dict()
            write_json(doc, out_dir / "solution.json")
            print(_summary(doc))
        elif command == "sweep":
            rep = run_sweep(cfg)
            emit_report(rep, out_dir / "sweep.csv")
            print(f"rows={len(rep.rows)} C_fit={rep.c_fit:.6g} spread={rep.ratio_spread:.3g}")
        elif command == "verify":
            rows = verify(cfg)
            write_json(rows, out_dir / "verify.json")
            print(f"{'check':<16}{'param':>14}{'lhs':>16}{'rhs':>16}  result")
            for r in rows:
                print(f"{r['check']:<16}{r['param']:>14.6g}{r['lhs']:>16.8g}{r['rhs']:>16.8g}  "
                      f"{'PASS' if r['pass'] else 'FAIL'}")
            if not all(r["pass"] for r in rows):
                return EXIT_VERIFY
        elif command == "oracle":
            doc = oracle(cfg)
            write_json(doc, out_dir / "oracle.json")
            print(" ".join(f"{k}={v:.10g}" for k, v in doc.items() if isinstance(v, float)))
        else:
            raise ConfigError(f"unknown command {command!r}")
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
