import json
import subprocess
import sys

import pytest

from fockswap.cli import EXIT_CONFIG, EXIT_FIT, EXIT_OK, EXIT_TRUNCATION, EXIT_USAGE, main
from fockswap.runner import golden_path, read_csv


def test_list_configs(capsys):
    assert main(["list-configs"]) == EXIT_OK
    assert capsys.readouterr().out.split() == ["fig1b", "fig2a", "fig2b", "fig3a", "fig3d", "fig3e", "fig4a", "fig4b"]


def test_validate_bundled_and_broken(tmp_path, capsys):
    assert main(["validate", "fig2b"]) == EXIT_OK
    bad = tmp_path / "bad.toml"
    bad.write_text('kind = "swap"\nshots = -1\n')
    assert main(["validate", str(bad)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 2: shots" in err and "[prep.B]" in err and "[[sweep]]" in err


def test_missing_config_is_a_config_error():
    assert main(["validate", "fig9z"]) == EXIT_CONFIG


def test_usage_errors():
    assert main([]) == EXIT_USAGE
    assert main(["fit", "polynomial", "x.csv"]) == EXIT_USAGE


def test_run_writes_the_golden_csv(tmp_path, capsys):
    out = tmp_path / "fig2b.csv"
    assert main(["run", "fig2b", "-o", str(out), "--threads", "2"]) == EXIT_OK
    assert out.read_bytes() == golden_path("fig2b").read_bytes()


def test_run_reports_truncation_errors(tmp_path):
    cfg = tmp_path / "small.toml"
    cfg.write_text(
        'kind = "swap"\n[layout]\nmode_dims = [6, 6, 6]\n'
        '[prep.B]\nkind = "fock"\nm = 3\n[prep.C]\nkind = "fock"\nm = 0\n'
        '[[sweep]]\nparameters = ["C.m"]\nvalues = [2, 3]\n'
    )
    assert main(["run", str(cfg), "-o", str(tmp_path / "o.csv")]) == EXIT_TRUNCATION


def test_calibrate_then_fit(tmp_path, capsys):
    out = tmp_path / "cal.csv"
    assert main(["calibrate", "--points", "21", "--seed", "3", "-o", str(out)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["omega0_hz"] == pytest.approx(680, rel=0.02)
    header, rows = read_csv(out)
    assert header[0] == "duration" and len(rows) == 21
    assert main(["fit", "sine-squared", str(out), "--sigma", "stderr"]) == EXIT_FIT  # zero stderr at T = 0
    assert main(["fit", "sine-squared", str(out)]) == EXIT_OK


def test_fit_golden_cat_curve(capsys):
    assert main(["fit", "cat-eq2", str(golden_path("fig3e")), "--y", "overlap_from_pg"]) == EXIT_OK
    params = json.loads(capsys.readouterr().out)["params"]
    assert params["gamma"] == pytest.approx(1.0, abs=1e-6)
    assert params["alpha_sq"] == pytest.approx(1.0, rel=1e-6)


def test_fit_unknown_column():
    assert main(["fit", "cat-eq2", str(golden_path("fig3e")), "--y", "nope"]) == EXIT_FIT


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fockswap.cli", "list-configs"], capture_output=True, text=True)
    assert proc.returncode == 0 and "fig4b" in proc.stdout
