# Tests for the command-line interface

import os
import json

import pandas as pd
import pytest

from implementation.cli import EXIT_ERROR, EXIT_MC_FAILED, EXIT_OK, main, parse_misalignment
from implementation.exceptions import ConfigError

RECIPES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "recipes")
BASELINE = os.path.join(RECIPES, "baseline.cfg")


@pytest.fixture(autouse=True)
def in_tmp_dir(tmp_path, monkeypatch):
    # Log files land in ./output
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(capsys, *argv):
    status = main(["--no-progress", *argv])
    return status, capsys.readouterr()


def printed_value(out, name):
    for line in out.splitlines():
        if line.startswith(f"{name} = "):
            return line.split(" = ", 1)[1]
    raise AssertionError(f"{name} not printed")


def test_parse_misalignment():
    assert parse_misalignment("none")["misalignment"] == "none"
    assert parse_misalignment("fluct:0.5")["sigma_d"] == 0.5
    assert parse_misalignment("fixed:0.01")["delta_x"] == 0.01
    for bad in ("fluct", "fixed:x", "wobbly:1"):
        with pytest.raises(ConfigError):
            parse_misalignment(bad)


def test_dmin_baseline(capsys):
    status, captured = run(capsys, "dmin", "--config", BASELINE)
    assert status == EXIT_OK
    assert float(printed_value(captured.out, "d_min").split()[0]) == pytest.approx(1.6669e-3, rel=1e-3)
    assert float(printed_value(captured.out, "d_rayleigh").split()[0]) == pytest.approx(0.6)
    assert printed_value(captured.out, "resolved") == "true"


def test_dmin_overrides(capsys):
    status, captured = run(capsys, "dmin", "--config", BASELINE, "--ell", "1000", "--misalignment", "fixed:0.01")
    assert status == EXIT_OK
    assert printed_value(captured.out, "resolved") == "false"


def test_dmin_negative_offset_matches_positive(capsys):
    outputs = {}
    for offset in ("0.01", "-0.01"):
        status, captured = run(capsys, "dmin", "--config", BASELINE, "--ell", "1000",
                               "--misalignment", f"fixed:{offset}")
        assert status == EXIT_OK
        outputs[offset] = captured.out
    left = float(printed_value(outputs["-0.01"], "d_min").split()[0])
    right = float(printed_value(outputs["0.01"], "d_min").split()[0])
    assert left > 0
    assert left == pytest.approx(right, rel=1e-12)
    assert printed_value(outputs["-0.01"], "resolved") == "false"


def test_bad_misalignment_exits_with_error(capsys):
    status, captured = run(capsys, "dmin", "--config", BASELINE, "--misalignment", "sideways")
    assert status == EXIT_ERROR
    assert "misalignment" in captured.err


def test_config_error_exits_with_error(capsys, in_tmp_dir):
    bad = in_tmp_dir / "bad.cfg"
    bad.write_text("eta = 1.5\n")
    status, captured = run(capsys, "dmin", "--config", str(bad))
    assert status == EXIT_ERROR
    assert "key 'eta', line 1" in captured.err


def test_missing_config_exits_with_error(capsys):
    status, _ = run(capsys, "dmin", "--config", "no-such-file.cfg")
    assert status == EXIT_ERROR


def test_sweep_writes_csv_and_plot(capsys, in_tmp_dir):
    out = in_tmp_dir / "sweep" / "sweep.csv"
    plot = in_tmp_dir / "sweep" / "sweep.svg"
    status, _ = run(capsys, "sweep", "--config", os.path.join(RECIPES, "distance_efficiency.cfg"),
                    "--out", str(out), "--plot", str(plot))
    assert status == EXIT_OK
    assert len(pd.read_csv(out)) == 1200
    assert plot.read_text().count('id="series-') == 6


def test_region_writes_map(capsys, in_tmp_dir):
    out = in_tmp_dir / "offset_region.csv"
    status, _ = run(capsys, "region", "--config", os.path.join(RECIPES, "offset_region.cfg"),
                    "--axis1", "ell", "--axis2", "delta_x", "--out", str(out))
    assert status == EXIT_OK
    table = pd.read_csv(out)
    assert list(table.columns[:2]) == ["ell", "delta_x"]
    assert len(table) == 600


def test_region_with_undeclared_axis(capsys, in_tmp_dir):
    status, _ = run(capsys, "region", "--config", os.path.join(RECIPES, "offset_region.cfg"),
                    "--axis1", "ell", "--axis2", "eta", "--out", str(in_tmp_dir / "x.csv"))
    assert status == EXIT_ERROR


def test_mc_baseline_passes(capsys, in_tmp_dir):
    report_path = in_tmp_dir / "reports" / "mc.json"
    status, captured = run(capsys, "mc", "--config", BASELINE, "--shots", "100000", "--seed", "7",
                           "--report", str(report_path))
    assert status == EXIT_OK
    assert json.loads(captured.out)["shots"] == 100000
    assert json.loads(report_path.read_text())["passed"] is True


def test_mc_corrupted_variance_fails(capsys):
    status, _ = run(capsys, "mc", "--config", BASELINE, "--shots", "100000", "--seed", "7",
                    "--variance-scale", "1.1")
    assert status == EXIT_MC_FAILED


def test_mc_low_power_warning(capsys):
    _, captured = run(capsys, "mc", "--config", BASELINE, "--shots", "10", "--seed", "7")
    report = json.loads(captured.out)
    assert any("low statistical power" in warning for warning in report["warnings"])


def test_mc_rejects_zero_shots(capsys):
    status, _ = run(capsys, "mc", "--config", BASELINE, "--shots", "0")
    assert status == EXIT_ERROR


def test_modes_profile(capsys, in_tmp_dir):
    out = in_tmp_dir / "u1.csv"
    status, _ = run(capsys, "modes", "--n", "1", "--z", "1e5", "--out", str(out), "--points", "51")
    assert status == EXIT_OK
    table = pd.read_csv(out)
    assert list(table.columns) == ["x", "intensity"]
    assert len(table) == 51


def test_log_file_is_written(capsys, in_tmp_dir):
    run(capsys, "dmin", "--config", BASELINE)
    assert (in_tmp_dir / "output" / "homodyne.log").exists()
