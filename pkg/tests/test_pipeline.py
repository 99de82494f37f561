import csv
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dwindex.config import load_config, n2_config
from dwindex.pipeline import (
    LEDGER_HEADER,
    IndexReport,
    PipelineError,
    dertau_check,
    emit_report,
    run_experiment,
    run_lemma32_sweep,
    wall_gauge,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="module")
def report():
    exp = n2_config("q1-nu0.3", 1, 0.3, checks=("aps", "lemma31", "flow", "ta"), levels=600)
    return run_experiment(exp, timestamp=False)


@pytest.fixture(scope="module")
def trivial():
    return run_experiment(load_config(CONFIGS / "t2_trivial.ini"))


def test_ledger_closes(report):
    assert report.index == 1
    assert report.bulk_integral == pytest.approx(0.7, abs=1e-10)
    assert report.eta_tilde == pytest.approx(-0.6, abs=1e-12)
    assert report.residual < 1e-10
    assert report.recomputed_residual() == pytest.approx(report.residual, abs=1e-15)
    assert report.passed
    assert report.ledger_line() == "1 = 0.7 − (-0.3) + 0"


def test_trivial_report(trivial, tmp_path):
    assert trivial.index == 0
    assert trivial.ledger_line() == "0 = 0 − 0 + 0"
    paths = emit_report(trivial, tmp_path)
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(p.name for p in paths.values())
    assert len(paths) == 3
    text = paths["text"].read_text(encoding="utf-8")
    assert LEDGER_HEADER in text and "overall: PASS" in text


def test_json_roundtrip(report):
    text = report.to_json()
    back = IndexReport.from_json(text)
    assert back == report
    assert back.to_json() == text


def test_report_is_deterministic(report):
    exp = n2_config("q1-nu0.3", 1, 0.3, checks=("aps", "lemma31", "flow", "ta"), levels=600)
    again = run_experiment(exp, timestamp=False)
    assert again.to_json(timestamp=False) == report.to_json(timestamp=False)


def test_csv_outputs(report, tmp_path):
    paths = emit_report(report, tmp_path)
    with open(paths["spectrum"]) as fh:
        rows = list(csv.DictReader(fh))
    lam = np.array([float(r["eigenvalue"]) for r in rows])
    assert np.all(np.diff(lam) >= 0)
    assert set(float(r["chirality"]) for r in rows) <= {1.0, -1.0}
    with open(paths["eta_integrand"]) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == report.config["run"]["quadrature_nodes"]
    loaded = json.loads(paths["json"].read_text(encoding="utf-8"))
    assert loaded["residual"] == report.residual


def test_unwritable_outdir(trivial, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(PipelineError) as err:
        emit_report(trivial, blocker / "sub")
    assert err.value.stage == "emit"


def test_sweep_negative_control_fails():
    exp = load_config(CONFIGS / "control_inadequate_cutoff.ini")
    res = run_lemma32_sweep(exp)
    assert not res["passed"]
    assert not res["constant"]
    lo, hi = res["bracket"]
    assert lo < hi
    idx = {r["delta"]: r["index"] for r in res["rows"]}
    assert idx[lo] != idx[hi]


def test_endpoint_zero_mode_flow_fails():
    exp = load_config(CONFIGS / "control_endpoint_zero_mode.ini")
    rep = run_experiment(exp, timestamp=False)
    flow = next(c for c in rep.checks if c["name"] == "flow")
    assert not flow["passed"]
    assert "zero mode" in flow["detail"]["error"]
    assert not rep.passed


def test_dertau_refuses_crossing():
    from scipy.optimize import brentq

    from dwindex.gauge import smear

    wcfg = wall_gauge(n2_config("x", 0, 1.0, alpha=0.3).gauge())
    s_star = brentq(lambda s: smear(np.array([s]))[0] - 0.7, 0.0, 1.0)
    with pytest.raises(PipelineError):
        dertau_check(wcfg, 1.0, cutoff=16, s0=s_star)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-1, 1))
def test_ledger_line_formatting(bulk, eta, ta):
    rep = IndexReport("x", {}, "", "0", 0, {}, bulk, eta, 0.0, ta, 0.0)
    line = rep.ledger_line()
    assert line.startswith("0 = ") and " − " in line and " + " in line
    if 0.5 * eta < -5e-13:
        assert "(" in line
