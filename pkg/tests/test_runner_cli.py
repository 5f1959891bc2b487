import numpy as np
import pytest

import adiabatic_jumps as aj
from adiabatic_jumps.cli import main
from adiabatic_jumps.config import parse_config


def config_for(family, lam=10.0, params=None, **extra):
    data = {
        "model": {"family": family, "params": params or {}},
        "run": {"lambda": lam},
        "oracle": {"slices": 3000, "rtol": 1e-10},
    }
    for path, value in extra.items():
        section, key = path.split(".")
        data.setdefault(section, {})[key] = value
    return parse_config(data)


def test_run_single_constant_point():
    cfg = config_for("constant")
    result = aj.run_single(cfg)
    assert np.max(result.residuals) <= 1e-10
    assert np.max(np.abs(result.moving_amplitudes[1:])) <= 1e-12
    assert result.cross_oracle_diff <= 1e-10
    assert result.gamma == 0.0


def test_run_single_rotated_frame_closed_form():
    cfg = config_for("rotated_frame", lam=10.0, **{"run.order": 1})
    result = aj.run_single(cfg)
    assert abs(result.transition_amplitudes[1, 1]) == pytest.approx(0.191785,
                                                               abs=1e-6)


def test_run_single_gap_collapse_tagged_with_stage():
    cfg = config_for("landau_zener_window", params={"gap": 1e-5, "sweep": 1.5})
    with pytest.raises(aj.PipelineError) as err:
        aj.run_single(cfg)
    assert err.value.stage == "frame"
    assert isinstance(err.value.cause, aj.GapCollapse)


def test_berry_check_reported():
    cfg = config_for("rotating_spin", lam=200.0,
                     **{"reports.berry_check": True})
    result = aj.run_single(cfg)
    assert result.berry_phase == pytest.approx(-np.pi / 2, abs=0.05)


def test_emit_single_run(tmp_path):
    cfg = config_for("constant")
    result = aj.run_single(cfg)
    files = aj.emit(result, cfg, tmp_path, ("csv", "json"))
    names = {f.name for f in files}
    assert names == {"amplitudes.csv", "summary.json", "manifest.json"}
    csv_text = (tmp_path / "amplitudes.csv").read_text()
    # header + dim * (order + 1) rows
    assert len(csv_text.strip().splitlines()) == 1 + 2 * 3
    again = aj.run_single(cfg)
    aj.emit(again, cfg, tmp_path / "again", ("csv", "json"))
    assert (tmp_path / "again" / "amplitudes.csv").read_bytes() == \
        (tmp_path / "amplitudes.csv").read_bytes()
    assert (tmp_path / "again" / "summary.json").read_bytes() == \
        (tmp_path / "summary.json").read_bytes()


def test_sweep_row_count_and_order(tmp_path):
    data = {
        "model": {"family": "rotated_frame"},
        "run": {"lambda_list": [40.0, 20.0, 80.0, 10.0, 160.0, 320.0]},
        "oracle": {"slices": 2000},
    }
    cfg = parse_config(data)
    sweep = aj.run_sweep(cfg, threads=2)
    assert len(sweep.results) == 6
    aj.emit(sweep, cfg, tmp_path, ("csv",))
    rows = (tmp_path / "amplitudes.csv").read_text().strip().splitlines()
    assert len(rows) == 1 + 6 * 2 * 3
    lams = [float(r.split(",")[0]) for r in rows[1:]]
    assert lams == sorted(lams)


def test_sweep_isolates_failing_points():
    data = {
        "model": {"family": "rotated_frame"},
        "run": {"lambda_list": [20.0, 2000.0]},
        "grid": {"policy": "uniform", "uniform_nodes": 257},
        "oracle": {"slices": 2000},
    }
    cfg = parse_config(data)
    sweep = aj.run_sweep(cfg, threads=2)
    assert (20.0, 1.0) in sweep.results
    assert (2000.0, 1.0) in sweep.errors
    assert "GridTooCoarse" in sweep.errors[(2000.0, 1.0)]


def test_sweep_fit_first_order_decay():
    data = {
        "model": {"family": "rotated_frame"},
        "run": {"lambda_list": [10.0, 25.0, 50.0, 100.0, 200.0, 400.0, 800.0],
                "order": 1},
        "oracle": {"slices": 2000},
        "reports": {"scaling_fit": True},
    }
    cfg = parse_config(data)
    sweep = aj.run_sweep(cfg, threads=4)
    report = sweep.fits["first_order"]
    assert report.fit is not None
    assert report.fit.exponent == pytest.approx(-1.0, abs=0.1)


def test_sweep_secular_probe_without_scaling_fit():
    data = {
        "model": {"family": "rotated_frame"},
        "run": {"lambda": 60.0, "S_list": [4.0, 8.0, 16.0, 32.0], "order": 2},
        "oracle": {"slices": 2000},
        "reports": {"secular_probe": True, "scaling_fit": False},
    }
    sweep = aj.run_sweep(parse_config(data), threads=2)
    report = sweep.fits["secular"]
    assert report.fit is not None
    assert report.fit.exponent == pytest.approx(1.0, abs=0.1)
    assert "first_order" not in sweep.fits


def test_sweep_outputs_thread_invariant(tmp_path):
    data = {
        "model": {"family": "landau_zener_window"},
        "run": {"lambda_list": [20.0, 40.0, 80.0], "order": 2},
        "oracle": {"slices": 2000},
        "reports": {"scaling_fit": True},
    }
    cfg = parse_config(data)
    blobs = []
    for threads in (1, 2):
        sweep = aj.run_sweep(cfg, threads=threads)
        out = tmp_path / f"t{threads}"
        aj.emit(sweep, cfg, out, ("csv", "json"))
        blobs.append(((out / "amplitudes.csv").read_bytes(),
                      (out / "summary.json").read_bytes()))
    assert blobs[0] == blobs[1]


# --- CLI ------------------------------------------------------------------------

def write_config(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return str(path)


def test_cli_run_roundtrip(tmp_path, capsys):
    path = write_config(tmp_path, """
[model]
family = "constant"
[run]
lambda = 10.0
[oracle]
slices = 2000
""")
    code = main(["run", "--config", path, "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 0
    assert "wrote" in out
    assert (tmp_path / "out" / "amplitudes.csv").exists()
    assert (tmp_path / "out" / "manifest.json").exists()


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = write_config(tmp_path, """
[model]
family = "no_such_family"
[run]
lambda = 10.0
""")
    assert main(["run", "--config", path, "--out", str(tmp_path / "o")]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2


def test_cli_numeric_error_exit_code(tmp_path, capsys):
    path = write_config(tmp_path, """
[model]
family = "landau_zener_window"
[model.params]
gap = 1e-5
[run]
lambda = 10.0
[oracle]
slices = 2000
""")
    code = main(["run", "--config", path, "--out", str(tmp_path / "o")])
    assert code == 3
    assert "frame" in capsys.readouterr().err


def test_cli_explain_deterministic(capsys):
    assert main(["explain", "--dim", "3", "--order", "2"]) == 0
    first = capsys.readouterr().out
    assert main(["explain", "--dim", "3", "--order", "2"]) == 0
    second = capsys.readouterr().out
    assert first == second
    assert "0 -> 1 -> 2" in first
    assert "order 2: 4 paths" in first
    assert "pure dynamical phase" in first


def test_cli_explain_rejects_bad_start(capsys):
    assert main(["explain", "--dim", "2", "--start", "5"]) == 2


def test_cli_validate_passes_quick(capsys):
    code = main(["validate", "--lam", "30", "--slices", "4000",
                 "--rtol", "1e-9", "--tolerance", "1e-5"])
    out = capsys.readouterr().out
    assert code == 0
    assert "checks passed" in out
    assert "FAIL" not in out


def test_cli_validate_fails_on_impossible_tolerance(capsys):
    code = main(["validate", "--lam", "30", "--slices", "50",
                 "--rtol", "1e-6", "--tolerance", "1e-14"])
    out = capsys.readouterr().out
    assert code == 4
    assert "FAIL" in out
