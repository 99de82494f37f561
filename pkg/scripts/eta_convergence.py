"""Finite differences of eta(0, D(s)) against the heat-kernel derivative, and the circle oracle.

    python scripts/eta_convergence.py --alpha 0.3 --nu 1.0
"""
import argparse

import numpy as np

from dwindex.config import n2_config
from dwindex.invariants import check_circle_eta
from dwindex.pipeline import dertau_check, flow_check, wall_gauge


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.3)
    ap.add_argument("--nu", type=float, default=1.0)
    ap.add_argument("--cutoff", type=int, default=24)
    args = ap.parse_args()

    wcfg = wall_gauge(n2_config("family", 0, args.nu, alpha=args.alpha).gauge())
    steps = (16, 32, 64, 128, 256, 512)
    r = dertau_check(wcfg, 1.0, cutoff=args.cutoff, steps=steps)
    print(f"target d eta/ds at s = {r['s0']}: {r['target']:.12f}")
    for m, e in zip(steps, r["rel_errors"]):
        print(f"  step l/{m:<4d} relative error {e:.3e}")
    orders = np.log2(np.array(r["rel_errors"][:-1]) / np.array(r["rel_errors"][1:]))
    print("  observed orders", " ".join(f"{o:.3f}" for o in orders))

    f = flow_check(wcfg, (args.cutoff,), 1.0, 64)
    print(f"eta~ = {f['eta_tilde']:.12f}, eta(D+) - eta(D-) = {f['eta_plus'] - f['eta_minus']:.12f}, flow {f['flow']}, residual {f['residual']:.1e}")
    (c,) = check_circle_eta({"circle_eta": 1e-8})
    print(f"circle eta oracle: max error {c.value:.1e}")


if __name__ == "__main__":
    main()
