"""Experiment driver: config handling, override grammar, reports, exit codes.

Fast end-to-end smokes use aggressively reduced instances of the stock
configurations; the full-size runs live in the acceptance suite.
"""

import json
import os
import warnings
from pathlib import Path

import pytest

from dirac_lab.cli import (ExperimentConfig, _coerce_value, apply_overrides,
                           load_config, main)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

TINY_VERIFY = ["--set", "stencil.h_sequence=[0.2,0.1,0.05]",
               "--set", "corpus.diamagnetic_points=40"]
# the stock baseline value is frozen for the full-size radial instance, so
# reduced smokes must drop it (None disables the reproduction check)
TINY_SECTORS = ["--set", "sweep.M_values=[2,6]", "--set", "radial.n=400",
                "--set", "radial.rho_max=20.0", "--set", "sweep.K=12",
                "--set", "sweep.Lambda=3.0",
                "--set", "assert.baseline_max_gap=None"]


def run_tiny_sectors(out, extra=()):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return main(["sectors", "--config", str(CONFIGS / "sectors.toml"),
                     "--out", str(out), *TINY_SECTORS, *extra])


# ---------------------------------------------------------------------------
# config plumbing


def test_coerce_value_literals_and_strings():
    assert _coerce_value("3") == 3
    assert _coerce_value("0.5") == 0.5
    assert _coerce_value("[1, 2.5]") == [1, 2.5]
    assert _coerce_value("True") is True
    assert _coerce_value("miller-simon") == "miller-simon"


def test_apply_overrides_dotted_paths():
    raw = {"radial": {"n": 2000}}
    apply_overrides(raw, ["radial.n=300", "sweep.K=4", "potential.gamma=0.25"])
    assert raw["radial"]["n"] == 300
    assert raw["sweep"]["K"] == 4
    assert raw["potential"]["gamma"] == 0.25


def test_apply_overrides_rejects_bad_grammar():
    with pytest.raises(ValueError, match="KEY=VALUE"):
        apply_overrides({}, ["noequals"])
    with pytest.raises(ValueError, match="not a table"):
        apply_overrides({"a": 1}, ["a.b=2"])


def test_experiment_config_dotted_get_and_section():
    cfg = ExperimentConfig(experiment="sectors",
                           raw={"sweep": {"K": 4}, "flat": 7},
                           seed=1, out_dir=".")
    assert cfg.get("sweep.K") == 4
    assert cfg.get("sweep.missing", "fallback") == "fallback"
    assert cfg.section("sweep") == {"K": 4}
    assert cfg.section("absent") == {}
    with pytest.raises(ValueError, match="expected a table"):
        cfg.section("flat")


def test_load_config_reads_toml(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('experiment = "verify"\n[stencil]\norders = [2, 4]\n')
    raw = load_config(str(path))
    assert raw["experiment"] == "verify"
    assert raw["stencil"]["orders"] == [2, 4]


# ---------------------------------------------------------------------------
# driver smokes (reduced instances)


def test_verify_smoke_passes_and_writes_outputs(tmp_path):
    out = tmp_path / "v"
    rc = main(["verify", "--config", str(CONFIGS / "verify.toml"),
               "--out", str(out), *TINY_VERIFY])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["experiment"] == "verify"
    assert report["all_pass"] is True
    assert (out / "residuals.csv").read_text().startswith("identity")


def test_sectors_smoke_writes_spectrum_and_gap_tables(tmp_path):
    out = tmp_path / "s"
    rc = run_tiny_sectors(out)
    assert rc == 0
    assert (out / "spectrum.csv").exists()
    assert (out / "gaps.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert report["experiment"] == "sectors"
    assert report["gap_sweep"][-1]["M"] == 6


def test_gauge_smoke_passes(tmp_path):
    out = tmp_path / "g"
    rc = main(["gauge", "--config", str(CONFIGS / "gauge.toml"), "--out", str(out),
               "--set", "reconstruction.qstep=0.1",
               "--set", "reconstruction.half_width=2.0"])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["all_pass"] is True
    for section in ("reconstruction", "covariance", "decay"):
        assert all(leg["pass"] for leg in report[section])


def test_reports_are_byte_identical_across_reruns(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out in (out1, out2):
        rc = main(["verify", "--config", str(CONFIGS / "verify.toml"),
                   "--out", str(out), *TINY_VERIFY])
        assert rc == 0
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "residuals.csv").read_bytes() == (out2 / "residuals.csv").read_bytes()


def test_failed_assertion_exits_one_and_is_recorded(tmp_path):
    out = tmp_path / "fail"
    rc = run_tiny_sectors(out, extra=["--set", "assert.baseline_max_gap=999"])
    assert rc == 1
    report = json.loads((out / "report.json").read_text())
    assert report["all_pass"] is False
    assert report["baseline_check"]["pass"] is False


# ---------------------------------------------------------------------------
# error paths and environment


def test_missing_config_file_is_a_config_error(tmp_path, capsys):
    rc = main(["verify", "--config", str(tmp_path / "nope.toml")])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_experiment_mismatch_rejected(capsys):
    rc = main(["weyl", "--config", str(CONFIGS / "sectors.toml")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "config error" in err and "declares" in err


def test_invalid_field_parameter_names_the_config_key(tmp_path, capsys):
    rc = main(["sectors", "--config", str(CONFIGS / "sectors.toml"),
               "--out", str(tmp_path), *TINY_SECTORS,
               "--set", "potential.gamma=1.5"])
    assert rc == 2
    assert "open interval" in capsys.readouterr().err


def test_default_output_directory_is_runs_experiment(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    rc = main(["verify", "--config", str(CONFIGS / "verify.toml"), *TINY_VERIFY])
    assert rc == 0
    assert (tmp_path / "runs" / "verify" / "report.json").exists()


@pytest.mark.filterwarnings("ignore:The TBB threading layer")
def test_thread_cap_env_var_recorded_in_report(tmp_path, monkeypatch):
    monkeypatch.setenv("DIRAC_LAB_THREADS", "2")
    out = tmp_path / "t"
    rc = main(["verify", "--config", str(CONFIGS / "verify.toml"),
               "--out", str(out), *TINY_VERIFY])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["runtime"]["threads_cap"] == "2"


def test_console_entry_point_installed():
    from importlib.metadata import entry_points

    eps = entry_points()
    scripts = eps.select(group="console_scripts") if hasattr(eps, "select") else eps["console_scripts"]
    names = {ep.name for ep in scripts}
    assert "dirac-lab" in names
