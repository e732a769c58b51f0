import json
import math

import pytest

from kerrlind.cli import main
from kerrlind.errors import ConfigInvalid
from kerrlind.model import TWO_PI, alpha_squared, kerr_coefficient
from kerrlind.plotting import plot_lifetimes
from kerrlind.sweep import (
    REFERENCE_CONFIG,
    ROW_COLUMNS,
    SweepSpec,
    Tolerances,
    build_manifest,
    check_coefficients,
    figure_series,
    point_params,
    reference_config,
    rows_from_csv,
    rows_to_csv,
    run_sweep,
)

SMALL = Tolerances(max_dim=40)


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "reference.json"
    path.write_text(json.dumps(REFERENCE_CONFIG))
    return path


@pytest.mark.parametrize("kwargs, match", [
    (dict(axis="temperature", values=(1,), orders=("0",)), "axis"),
    (dict(axis="alpha_sq", values=(), orders=("0",)), "values"),
    (dict(axis="alpha_sq", values=(2, 1), orders=("0",)), "increasing"),
    (dict(axis="alpha_sq", values=(1,), orders=("3",)), "orders"),
    (dict(axis="alpha_sq", values=(1,), orders=("0",), parallelism=0), "parallelism"),
])
def test_sweep_spec_validation(kwargs, match):
    with pytest.raises(ConfigInvalid, match=match):
        SweepSpec(**kwargs)


def test_point_params_axes(reference):
    p, a2 = point_params(reference, "alpha_sq", 6.0)
    assert a2 == 6.0 and alpha_squared(p) == pytest.approx(6.0)
    p, a2 = point_params(reference, "kerr_over_2pi", 2e6)
    assert kerr_coefficient(p) / TWO_PI == pytest.approx(2e6)
    assert alpha_squared(p) == pytest.approx(reference.alpha_sq)
    p, _ = point_params(reference, "kappa_2ph", 0.003)
    assert p.kappa_2ph == pytest.approx(3e3)


def test_fig2_series_hit_target_kerr():
    for label, overrides, orders in figure_series("fig2"):
        cfg = reference_config(**overrides)
        target = float(label.split("=")[1].rstrip("MHz")) * 1e6
        assert kerr_coefficient(cfg.params) / TWO_PI == pytest.approx(target, rel=1e-9)
        assert orders == ("2",)


def test_parallel_matches_serial(reference):
    spec = SweepSpec("alpha_sq", (1.0, 2.0), ("0", "1"))
    serial = run_sweep(reference, spec, SMALL)
    parallel = run_sweep(reference, SweepSpec("alpha_sq", (1.0, 2.0), ("0", "1"), parallelism=2), SMALL)
    assert rows_to_csv(serial) == rows_to_csv(parallel)
    assert [(r.value, r.order) for r in serial] == [(1.0, "0"), (1.0, "1"), (2.0, "0"), (2.0, "1")]


def test_failed_points_are_recorded(reference):
    rows = run_sweep(reference, SweepSpec("kerr_over_2pi", (0.0, 1e6), ("1",)), SMALL)
    assert rows[0].error.startswith("DegenerateParams")
    assert rows[1].ok and rows[1].t_x_us > 0
    parsed = rows_from_csv(rows_to_csv(rows))
    assert list(parsed[0]) == list(ROW_COLUMNS)
    assert parsed[0]["t_x_us"] == ""
    assert float(parsed[1]["t_x_us"]) == rows[1].t_x_us


def test_manifest_contents(reference):
    spec = SweepSpec("alpha_sq", (1.0,), ("0",))
    m = build_manifest(reference, spec, SMALL)
    assert m["resolved"]["kerr_over_2pi_hz"] == pytest.approx(320e3, rel=1e-3)
    assert m["tolerances"]["max_dim"] == 40
    assert m["vectorization"] == "column-stacking"
    assert m["config"]["g3_over_6pi_hz"] == 20e6


def test_coefficient_report(reference):
    r = check_coefficients(reference)
    assert r.kerr_over_2pi_hz == pytest.approx(320e3, rel=1e-3)
    assert r.occupations["one"] == pytest.approx(0.239041923773872649, rel=1e-9)
    assert "ratio" in r.text()


def test_plot_written(tmp_path, reference):
    rows = run_sweep(reference, SweepSpec("alpha_sq", (1.0, 2.0), ("0",)), SMALL)
    out = plot_lifetimes(rows, tmp_path / "a.png")
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_sweep_outputs_are_deterministic(tmp_path, config_file, capsys):
    outputs = []
    for k in range(2):
        out = tmp_path / f"run{k}" / "sweep.csv"
        code, _, _ = run_cli(
            ["sweep", "--config", config_file, "--axis", "alpha_sq", "--values", "1,2",
             "--orders", "0,1", "--out", out, "--jobs", 1, "--max-dim", 40], capsys,
        )
        assert code == 0
        outputs.append({s: out.with_suffix(s).read_bytes() for s in (".csv", ".manifest.json", ".spectra.jsonl", ".png")})
    assert outputs[0] == outputs[1]
    lines = outputs[0][".csv"].decode().splitlines()
    assert lines[0] == ",".join(ROW_COLUMNS)
    assert len(lines) == 5
    spectra = [json.loads(x) for x in outputs[0][".spectra.jsonl"].decode().splitlines()]
    assert all(len(s["smallest_re_parts"]) == 10 for s in spectra)


def test_cli_sweep_failure_exit_code(tmp_path, config_file, capsys):
    code, _, err = run_cli(
        ["sweep", "--config", config_file, "--axis", "kerr_over_2pi", "--values", "0",
         "--orders", "1", "--out", tmp_path / "s.csv", "--no-plot"], capsys,
    )
    assert code == 3
    assert "DegenerateParams" in err


def test_cli_check(config_file, capsys):
    code, out, _ = run_cli(["check", "--config", config_file, "--expect-k-hz", "320000"], capsys)
    assert code == 0
    assert "K/2pi            = 320000 Hz" in out
    code, _, err = run_cli(["check", "--config", config_file, "--expect-k-hz", "300000"], capsys)
    assert code == 1
    assert "deviates" in err


def test_cli_config_error(tmp_path, capsys):
    raw = json.loads(json.dumps(REFERENCE_CONFIG))
    raw["bath"]["one"]["temp_mk"] = -5
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(raw))
    code, _, err = run_cli(["check", "--config", path], capsys)
    assert code == 2
    assert "bath.one.temp_mk" in err


def test_cli_missing_file(tmp_path, capsys):
    code, _, err = run_cli(["check", "--config", tmp_path / "nope.json"], capsys)
    assert code == 2
    assert "nope.json" in err


def test_cli_channels(config_file, capsys):
    code, out, _ = run_cli(["channels", "--config", config_file, "--order", "1", "--alpha-sq", "4"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("order,bath_label,direction")
    assert lines[1].startswith("1,half,loss")


def test_cli_dynamics(tmp_path, config_file, capsys):
    out = tmp_path / "traj.csv"
    code, text, _ = run_cli(
        ["dynamics", "--config", config_file, "--alpha-sq", "2", "--order", "0",
         "--t-final-us", "2500", "--samples", "120", "--dim", "18", "--out", out, "--compare"], capsys,
    )
    assert code == 0
    fitted = float(text.split("fitted T_X = ")[1].split()[0])
    spectral = float(text.split("spectral T_X = ")[1].split()[0])
    assert fitted == pytest.approx(spectral, rel=0.01)
    assert len(out.read_text().splitlines()) == 121


def test_cli_figure_small(tmp_path, capsys):
    code, out, _ = run_cli(["figure", "fig4", "--out", tmp_path, "--values", "1", "--jobs", "1",
                            "--max-dim", "40"], capsys)
    assert code == 0
    rows = rows_from_csv((tmp_path / "fig4.csv").read_text())
    assert [(r["series"], r["order"]) for r in rows] == [
        ("no cooling", "0"), ("no cooling", "2"), ("kappa_2ph=0.003/us", "2"),
    ]
    assert (tmp_path / "fig4.png").exists()
    manifest = json.loads((tmp_path / "fig4.manifest.json").read_text())
    assert manifest["figure"] == "fig4"
    assert math.isclose(float(rows[2]["kappa_2ph_per_us"]), 0.003)
