import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from dwindex.cli import main
from dwindex.dirac import load_operator
from dwindex.pipeline import IndexReport

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_check_structural_subset(tmp_path, capsys):
    assert main(["check", "clifford", "ta", "--outdir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "PASS clifford n=4 wall-adapted" in out
    results = json.loads((tmp_path / "checks.json").read_text())
    assert results and all(r["passed"] for r in results)


def test_check_lemma_with_config(tmp_path):
    cfg = CONFIGS / "t2_q0_nu0.3.ini"
    assert main(["check", "lemma31", "--config", str(cfg), "--outdir", str(tmp_path)]) == 0


def test_verify_trivial_writes_three_files(tmp_path, capsys):
    code = main(["--threads", "1", "verify", str(CONFIGS / "t2_trivial.ini"), "--outdir", str(tmp_path), "--no-timestamp"])
    assert code == 0
    assert len(list(tmp_path.iterdir())) == 3
    rep = IndexReport.from_json((tmp_path / "t2-trivial.json").read_text(encoding="utf-8"))
    assert rep.timestamp is None and rep.index == 0
    assert "0 = 0 − 0 + 0" in capsys.readouterr().out


def test_verify_failing_check_exits_one(tmp_path):
    assert main(["verify", str(CONFIGS / "control_endpoint_zero_mode.ini"), "--outdir", str(tmp_path)]) == 1


def test_tolerance_override_can_fail_a_run(tmp_path):
    cfg = str(CONFIGS / "t2_q0_nu0.3.ini")
    assert main(["verify", cfg, "--checks", "aps", "--tol", "integrality=1e-300", "--outdir", str(tmp_path)]) == 1


def test_usage_errors_exit_two(tmp_path):
    assert main(["verify", str(tmp_path / "missing.ini"), "--outdir", str(tmp_path)]) == 2
    assert main(["check", "--tol", "aps", "--outdir", str(tmp_path)]) == 2
    assert main(["check", "nonsense", "--outdir", str(tmp_path)]) == 2
    assert main(["check", "lemma31", "--outdir", str(tmp_path)]) == 2


def test_sweep_negative_control(tmp_path, capsys):
    cfg = str(CONFIGS / "control_inadequate_cutoff.ini")
    assert main(["sweep-delta", cfg, "--outdir", str(tmp_path)]) == 1
    assert "index jump between delta" in capsys.readouterr().out
    assert (tmp_path / "control-inadequate-cutoff_delta_sweep.csv").exists()


def test_export_operator(tmp_path):
    out = tmp_path / "op.bin"
    assert main(["export-operator", str(CONFIGS / "t2_q0_nu0.3.ini"), "--output", str(out)]) == 0
    mat, info = load_operator(out)
    assert np.abs(mat - mat.conj().T).max() < 1e-13
    assert mat.shape[0] == int(info["dimension"])


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "dwindex", "check", "clifford", "--outdir", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
