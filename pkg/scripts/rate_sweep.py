"""Entropic approximation gap against the unregularized value on the shipped instance.

Usage: python scripts/rate_sweep.py [--delta 0.0] [--out rate.csv]
"""
import argparse
import math

from rwdro import instances
from rwdro.approx import sweep
from rwdro.cli import emit_report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3, 1e-4])
    ap.add_argument("--delta", type=float, nargs="+", default=[0.0])
    ap.add_argument("--out", default=None, help="optional CSV path")
    args = ap.parse_args()

    prob = instances.shipped()
    pi0 = instances.shipped_reference(prob)
    rep = sweep(prob, pi0, args.eps, args.delta)
    print(f"sigma={pi0.sigma:g}  unregularized value={rep.rows[0].value_unreg:.12g}")
    print(f"{'eps':>8} {'delta':>8} {'eta':>10} {'gap':>12} {'gap/(d eta log(1/eta))':>24}")
    for r in rep.rows:
        ratio = r.gap / (rep.dim * r.eta * math.log(1 / r.eta)) if r.eta < 1 / math.e else math.nan
        print(f"{r.eps:8.0e} {r.delta:8.0e} {r.eta:10.4g} {r.gap:12.5e} {ratio:24.4f}")
    print(f"C_fit={rep.c_fit:.4g}  spread={rep.ratio_spread:.3g}")
    if args.out:
        emit_report(rep, args.out)


if __name__ == "__main__":
    main()
