"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances are the criterion targets; they are not taken from the configs so
that editing a config cannot loosen a criterion.
"""
import json
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from dwindex.clifford import standard_rep
from dwindex.cli import main
from dwindex.config import load_config, n2_config
from dwindex.dirac import BulkGalerkin
from dwindex.heat_kernel import check_lemma31
from dwindex.invariants import check_circle_eta, structural_checks, ta_values
from dwindex.pipeline import dertau_check, flow_check, index_gauge, run_experiment, run_lemma32_sweep, wall_gauge

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SUITE = [CONFIGS / f"t2_q{Q}_nu{nu}.ini" for Q in (0, 1, 2) for nu in ("0.0", "0.3", "0.7")]

# wall families with flow 0 and flow 1 on the circle of length 2 pi
FLOW0 = dict(alpha=0.2, nu=0.5)
FLOW1 = dict(alpha=0.3, nu=1.0)


def wall_family_cfg(alpha, nu):
    return wall_gauge(n2_config("family", 0, nu, alpha=alpha).gauge())


def test_criterion_1_n2_suite(record_criterion):
    start = time.perf_counter()
    worst_res = worst_dev = 0.0
    indices = {}
    for path in SUITE:
        exp = replace(load_config(path), checks=("aps",))
        assert exp.cutoffs == (24, 24)
        assert len(exp.run.times) == 3
        rep = run_experiment(exp, timestamp=False)
        worst_res = max(worst_res, rep.residual)
        worst_dev = max(worst_dev, rep.heat_trace["deviation"])
        indices[exp.name] = rep.index
    elapsed = time.perf_counter() - start
    ok = len(SUITE) >= 6 and worst_res < 1e-6 and worst_dev < 1e-6 and elapsed < 300
    record_criterion(1, ok, f"{len(SUITE)} configs, max residual {worst_res:.1e}, max heat-trace deviation {worst_dev:.1e}, {elapsed:.0f} s")
    assert worst_res < 1e-6
    assert worst_dev < 1e-6
    assert elapsed < 300
    assert indices == {f"t2-q{Q}-nu{nu}": Q for Q in (0, 1, 2) for nu in ("0.0", "0.3", "0.7")}


def test_criterion_2_n4_instance(record_criterion):
    start = time.perf_counter()
    exp = replace(load_config(CONFIGS / "t4_wall.ini"), checks=("aps",))
    rep = run_experiment(exp, timestamp=False)
    elapsed = time.perf_counter() - start
    gal = BulkGalerkin(index_gauge(exp), standard_rep(4), exp.cutoffs)
    largest = max(4 * len(dom) for _, dom in gal.sectors())
    ok = rep.residual < 1e-5 and rep.heat_trace["deviation"] < 1e-5 and abs(rep.eta_tilde) > 0.1 and largest <= 20000 and elapsed < 1800
    record_criterion(
        2, ok,
        f"T^4 eta~ = {rep.eta_tilde:.6f}, residual {rep.residual:.1e}, heat-trace deviation {rep.heat_trace['deviation']:.1e}, "
        f"largest block {largest}, {elapsed:.0f} s",
    )
    assert rep.residual < 1e-5
    assert rep.heat_trace["deviation"] < 1e-5
    assert abs(rep.eta_tilde) > 0.1
    assert largest <= 20000
    assert elapsed < 1800


def test_criterion_3_cylinder_identity(record_criterion):
    cases = {
        "n=2 nu=0.3": wall_gauge(n2_config("c", 0, 0.3).gauge()),
        "n=2 nu=0.7": wall_gauge(n2_config("c", 0, 0.7).gauge()),
        "n=4": wall_gauge(load_config(CONFIGS / "t4_wall.ini").gauge()),
    }
    out = {k: check_lemma31(cfg, 1.0) for k, cfg in cases.items()}
    res = {k: r["residual"] for k, r in out.items()}
    ok = all(v < 1e-6 for v in res.values())
    record_criterion(
        3, ok,
        "; ".join(f"{k}: int_C P = {r['cylinder_integral']:.12f}, -eta~/2 = {r['minus_half_eta']:.12f}, residual {r['residual']:.1e}" for k, r in out.items()),
    )
    assert ok


@pytest.mark.parametrize("Q, nu", [(0, 0.7), (1, 0.7), (2, 0.3)])
def test_criterion_4_delta_sweep(Q, nu, record_criterion):
    exp = load_config(CONFIGS / f"t2_q{Q}_nu{nu}.ini")
    deltas = tuple(round(0.1 * k, 1) for k in range(1, 11))
    res = run_lemma32_sweep(exp, deltas=deltas, transverse=True)
    idx = [r["index"] for r in res["rows"]]
    ok = len(set(idx)) == 1 and res["transverse_index"] == idx[0] == Q
    record_criterion(4, ok, f"Q={Q} nu={nu}: index {idx[0]} at all {len(idx)} deltas = {set(idx)}, sharp transverse index {res['transverse_index']}")
    assert len(set(idx)) == 1
    assert res["transverse_index"] == idx[0]


@pytest.mark.parametrize("family", ["flow0", "flow1"])
def test_criterion_5_dertau(family, record_criterion):
    params = FLOW0 if family == "flow0" else FLOW1
    r = dertau_check(wall_family_cfg(**params), 1.0, cutoff=24, steps=(128, 256))
    rel = r["rel_errors"]
    ok = rel[1] < 1e-3 and rel[1] < rel[0] and 1.8 < r["order"] < 2.2
    record_criterion(5, ok, f"{family}: rel. error {rel[0]:.2e} at l/128, {rel[1]:.2e} at l/256, observed order {r['order']:.3f}")
    assert rel[1] < 1e-3
    assert 1.8 < r["order"] < 2.2


@pytest.mark.parametrize("family, expected", [("flow0", 0), ("flow1", 1)])
def test_criterion_6_eta_reconciliation(family, expected, record_criterion):
    params = FLOW0 if family == "flow0" else FLOW1
    r = flow_check(wall_family_cfg(**params), (24,), 1.0, 64)
    (circle,) = check_circle_eta({"circle_eta": 1e-8})
    ok = r["flow"] == expected and r["residual"] < 1e-5 and circle.value < 1e-8
    record_criterion(6, ok, f"{family}: flow {r['flow']}, reconciliation residual {r['residual']:.1e}; circle eta error {circle.value:.1e}")
    assert r["flow"] == expected
    assert r["residual"] < 1e-5
    assert circle.value < 1e-8


def test_criterion_7_correction_term(record_criterion):
    v = ta_values(points=4)
    flat_reports = [run_experiment(n2_config("flat", 0, 0.3), timestamp=False).ta, run_experiment(replace(load_config(CONFIGS / "t4_wall.ini"), checks=()), timestamp=False).ta]
    ok = (
        v["flat"] == 0.0
        and all(t == 0.0 for t in flat_reports)
        and abs(v["n4"]) < 1e-9
        and abs(v["n6-traceless"]) < 1e-9
        and abs(v["n6-counter"]) > 1e-3
    )
    record_criterion(
        7, ok,
        f"flat {v['flat']!r}, n=4 {abs(v['n4']):.1e}, n=6 traceless {abs(v['n6-traceless']):.1e}, n=6 counter {v['n6-counter']:.5f}",
    )
    assert v["flat"] == 0.0 and all(t == 0.0 for t in flat_reports)
    assert abs(v["n4"]) < 1e-9
    assert abs(v["n6-traceless"]) < 1e-9
    assert abs(v["n6-counter"]) > 1e-3


def test_criterion_8_structural_suite(tmp_path, record_criterion):
    results = structural_checks()
    failed = [r.name for r in results if not r.passed]
    code = main(["check", "--outdir", str(tmp_path)])
    from_cli = json.loads((tmp_path / "checks.json").read_text())
    ok = not failed and code == 0 and len(from_cli) == len(results)
    record_criterion(8, ok, f"{len(results)} structural checks, failures {failed or 'none'}, CLI exit code {code}")
    assert not failed
    assert code == 0
    names = " ".join(r.name for r in results)
    for needle in ("clifford", "anticommutes", "pairing", "independent of t", "d T ch", "Chern integrality"):
        assert needle in names
