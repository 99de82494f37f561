"""Command line: ``dwindex {verify, sweep-delta, check, export-operator}``.

Exit status is 0 iff every requested check passes, 1 if one fails and 2 on
usage or stage errors.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

from threadpoolctl import threadpool_limits

from .clifford import standard_rep
from .config import CHECKS, ConfigError, load_config
from .dirac import bulk_discretization, export_operator
from .invariants import SUITE, structural_checks
from .pipeline import PipelineError, emit_report, index_gauge, run_experiment, run_lemma32_sweep

log = logging.getLogger("dwindex")


def _tolerance_overrides(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"tolerance override {item!r} is not KEY=VALUE")
        k, v = item.split("=", 1)
        out[k.strip()] = float(v)
        if not out[k.strip()] > 0:
            raise ConfigError(f"tolerance {k} must be positive")
    return out


def _load(path, overrides):
    exp = load_config(path)
    if overrides:
        exp = replace(exp, tolerances={**exp.tolerances, **overrides})
    return exp


def cmd_verify(args, overrides) -> int:
    ok = True
    for path in args.configs:
        exp = _load(path, overrides)
        if args.checks:
            exp = replace(exp, checks=tuple(args.checks))
        report = run_experiment(exp, timestamp=not args.no_timestamp)
        paths = emit_report(report, args.outdir)
        print(f"{exp.name}: {report.ledger_line()}  residual {report.residual:.2e}  -> {'PASS' if report.passed else 'FAIL'}")
        for c in report.checks:
            print(f"  {'PASS' if c['passed'] else 'FAIL'} {c['name']}" + ("" if c["value"] is None else f" {c['value']:.3e}"))
        log.info("wrote %s", ", ".join(str(p) for p in paths.values()))
        ok &= report.passed
    return 0 if ok else 1


def cmd_sweep(args, overrides) -> int:
    exp = _load(args.config, overrides)
    deltas = args.deltas or None
    cut = tuple(args.cutoffs) if args.cutoffs else None
    res = run_lemma32_sweep(exp, deltas, cutoffs=cut, levels=args.levels, transverse=False if args.no_transverse else None)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{exp.name}_sweep.json").write_text(json.dumps(res, sort_keys=True, indent=1) + "\n")
    with open(out / f"{exp.name}_delta_sweep.csv", "w") as fh:
        fh.write("delta,index,deviation\n")
        for r in res["rows"]:
            fh.write(f"{r['delta']!r},{r['index']},{r['deviation']!r}\n")
    for r in res["rows"]:
        print(f"delta {r['delta']:.2f}  index {r['index']}  deviation {r['deviation']:.2e}")
    if "transverse_index" in res:
        print(f"sharp-wall transverse index {res['transverse_index']}")
    if res["bracket"]:
        print(f"index jump between delta = {res['bracket'][0]} and {res['bracket'][1]}")
    if res["non_integral"]:
        print(f"heat trace not integral at delta = {res['non_integral']}")
    print("PASS" if res["passed"] else "FAIL")
    return 0 if res["passed"] else 1


def cmd_check(args, overrides) -> int:
    names = args.names or []
    # names in both sets ("ta") go to the config run when a config is given
    lemma = [n for n in names if n in CHECKS and (args.config or n not in SUITE)]
    structural = [n for n in names if n in SUITE and n not in lemma]
    unknown = set(names) - set(lemma) - set(structural)
    if unknown:
        raise ConfigError(f"unknown checks {sorted(unknown)}; choose from {sorted(SUITE) + list(CHECKS)}")
    results = []
    if structural or not names:
        results += [asdict(r) for r in structural_checks(structural or None, overrides)]
    if lemma:
        if not args.config:
            raise ConfigError("lemma checks need --config")
        exp = replace(_load(args.config, overrides), checks=tuple(lemma))
        results += run_experiment(exp, timestamp=False).checks
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "checks.json").write_text(json.dumps(results, sort_keys=True, indent=1, default=float) + "\n")
    for r in results:
        val = "n/a" if r["value"] is None else f"{r['value']:.3e}"
        print(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}: {val}" + (f"  {r['detail'].get('error')}" if "error" in r["detail"] else ""))
    return 0 if all(r["passed"] for r in results) else 1


def cmd_export(args, overrides) -> int:
    exp = _load(args.config, overrides)
    gc = index_gauge(exp, args.delta)
    disc = bulk_discretization(gc, standard_rep(exp.n), exp.cutoffs, levels=args.levels or exp.run.levels)
    op = disc.hermitian_operator()
    out = Path(args.output) if args.output else Path(args.outdir) / f"{exp.name}.op"
    out.parent.mkdir(parents=True, exist_ok=True)
    export_operator(op, out)
    print(f"wrote {out} (dimension {op.dim}, hermiticity residual {op.hermiticity_residual():.1e})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="BLAS/LAPACK thread limit")
    common.add_argument("--tol", action="append", default=argparse.SUPPRESS, metavar="KEY=VALUE", help="tolerance override (repeatable)")
    common.add_argument("--outdir", default=argparse.SUPPRESS, help="output directory (default: results)")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="dwindex", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the full verification for one or more configs")
    v.add_argument("configs", nargs="+")
    v.add_argument("--checks", nargs="*", choices=CHECKS, help="override the config's check list")
    v.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from the JSON report")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep-delta", parents=[common], help="index across the smoothing family")
    s.add_argument("config")
    s.add_argument("--deltas", type=float, nargs="*")
    s.add_argument("--cutoffs", type=int, nargs="*")
    s.add_argument("--levels", type=int)
    s.add_argument("--no-transverse", action="store_true")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check", parents=[common], help="structural invariants and individual lemma checks")
    c.add_argument("names", nargs="*", help=f"any of {sorted(SUITE)} or, with --config, {list(CHECKS)}")
    c.add_argument("--config")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("export-operator", parents=[common], help="binary dump of the bulk operator")
    e.add_argument("config")
    e.add_argument("--output")
    e.add_argument("--delta", type=float)
    e.add_argument("--levels", type=int)
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.threads = getattr(args, "threads", None)
    args.outdir = getattr(args, "outdir", "results")
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        overrides = _tolerance_overrides(getattr(args, "tol", None))
        limit = threadpool_limits(limits=args.threads) if args.threads else contextlib.nullcontext()
        with limit:
            return args.func(args, overrides)
    except (ConfigError, PipelineError, FileNotFoundError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
