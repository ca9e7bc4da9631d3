"""Lagrangian inequality, radius comparison and the explicit lower bound on random instances.

Usage: python scripts/check_bounds.py [--instances 20] [--seed 0]
"""
import argparse

import numpy as np

from rwdro import instances
from rwdro.approx import explicit_lower_bound, lagrangian_gap_check, optimal_radius, radius_compare
from rwdro.costs import build_reference, calibrate_sigma
from rwdro.entropic import RegParams, lambda_bar, solve_entropic


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--points", type=int, default=17)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    failures = 0
    print(f"{'#':>3} {'p':>3} {'eps':>6} {'delta':>6} {'lagr. margin':>13} {'radius margin':>14} {'lb <= value':>12}")
    for k in range(args.instances):
        prob = instances.random_problem(rng, n_points=args.points)
        pi0 = build_reference(prob.P, prob.cost, calibrate_sigma(prob.P, prob.cost, prob.rho))
        eps, delta = float(rng.choice([0.01, 0.05])), float(rng.choice([0.0, 0.01]))
        reg = RegParams(eps, delta, pi0.sigma)
        lbar = lambda_bar(prob, pi0)
        radius = optimal_radius(prob, reg, pi0)
        checks = [lagrangian_gap_check(prob, reg, pi0, lam, radius) for lam in (0.0, lbar / 2, lbar)]
        margin = min(c.rhs - c.lhs for c in checks)
        rcs = [radius_compare(prob, pi0, r * pi0.sigma) for r in (0.1, 0.5)]
        rmargin = min(rc.bound - (rc.value_rho - rc.value_shrunk) for rc in rcs)
        lb_ok = explicit_lower_bound(prob, reg, pi0)["lower_bound"] <= solve_entropic(prob, reg, pi0).value
        ok = all(c.holds for c in checks) and all(rc.bound_holds for rc in rcs) and lb_ok
        failures += not ok
        print(f"{k:3d} {prob.cost.p:3g} {eps:6g} {delta:6g} {margin:13.4g} {rmargin:14.4g} {str(lb_ok):>12}")
    print(f"{args.instances - failures}/{args.instances} instances satisfy every bound")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
