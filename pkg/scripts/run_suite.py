"""Run every config in a directory and print the ledger of each.

    python scripts/run_suite.py [configs/] [--outdir results] [--skip control_]
"""
import argparse
import time
from pathlib import Path

from dwindex.config import load_config
from dwindex.pipeline import LEDGER_HEADER, emit_report, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="?", default=str(Path(__file__).resolve().parent.parent / "configs"))
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--skip", default="control_", help="skip configs whose file name starts with this prefix")
    args = ap.parse_args()

    paths = sorted(p for p in Path(args.configs).glob("*.ini") if not (args.skip and p.name.startswith(args.skip)))
    print(f"{'config':<22} {LEDGER_HEADER:<40} {'residual':>9}  {'time':>6}  result")
    ok = True
    for p in paths:
        exp = load_config(p)
        t0 = time.perf_counter()
        rep = run_experiment(exp)
        emit_report(rep, args.outdir)
        ok &= rep.passed
        print(f"{exp.name:<22} {rep.ledger_line():<40} {rep.residual:9.1e}  {time.perf_counter() - t0:5.1f}s  {'PASS' if rep.passed else 'FAIL'}")
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":
    main()
