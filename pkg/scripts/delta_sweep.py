"""Index across the smoothing family for a range of Fourier cutoffs.

Shows the heat-trace deviation shrinking with the cutoff while the rounded
index stays put, and the inadequate-cutoff regime where it does not.

    python scripts/delta_sweep.py --flux 0 --nu 3.7 --cutoffs 3 8 24
"""
import argparse

from dwindex.config import n2_config
from dwindex.pipeline import run_lemma32_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--flux", type=int, default=0)
    ap.add_argument("--nu", type=float, default=0.7)
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[3, 8, 24])
    args = ap.parse_args()

    for K in args.cutoffs:
        exp = n2_config("sweep", args.flux, args.nu, alpha=args.alpha, cutoff=K)
        res = run_lemma32_sweep(exp, transverse=True)
        cells = "  ".join(f"{r['index']:+d}({r['deviation']:.0e})" for r in res["rows"])
        print(f"cutoff {K:3d}: {cells}")
        print(f"            sharp transverse index {res['transverse_index']}, constant: {res['constant']}, bracket: {res['bracket']}")


if __name__ == "__main__":
    main()
