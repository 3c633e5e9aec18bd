import math

import numpy as np
import pytest

from src.main import build_parser, main
from src.services import bessel
from src.storage import SCHEMA, read_json
from tests.conftest import write_config


def load_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


@pytest.fixture
def weak_config(tmp_path):
    return write_config(tmp_path / "weak.cfg", lambda_over_gamma=3, t_max_gamma=1, n_steps=100)


def test_parser_lists_commands():
    help_text = build_parser().format_help()
    for command in ("simulate", "qfunc", "sync", "sweep", "figures", "zeros"):
        assert command in help_text


def test_simulate_writes_dataset_and_sidecar(tmp_path, weak_config):
    out = tmp_path / "out"
    assert main(["simulate", "--config", weak_config, "--out", str(out)]) == 0
    lines = (out / "amplitude.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "gamma_t,re_b,im_b,pop_e"
    assert len(lines) == 102
    data = load_csv(out / "amplitude.csv")
    assert data[0].tolist() == [0.0, 1.0, 0.0, 1.0]
    meta = read_json(out / "amplitude.meta.json")
    assert meta["schema"] == SCHEMA
    assert meta["command"] == "simulate"
    assert meta["row_count"] == 101
    assert meta["params"]["lambda"] == 3.0
    assert meta["solver"]["rtol"] == 1e-9
    assert meta["contractive"] is True


def test_simulate_json_with_sync_and_backflow(tmp_path):
    config = write_config(
        tmp_path / "strong.cfg",
        lambda_over_gamma=0.01,
        t_max_gamma=60,
        n_steps=1200,
        observables="amplitude, sync, backflow",
        output_format="json",
    )
    out = tmp_path / "out"
    assert main(["simulate", "--config", config, "--out", str(out), "--verify"]) == 0
    amplitude = read_json(out / "amplitude.json")
    assert amplitude["columns"] == ["gamma_t", "re_b", "im_b", "pop_e"]
    assert len(amplitude["rows"]) == 1201
    assert amplitude["metadata"]["backflow"]["count"] >= 1
    assert amplitude["metadata"]["verification"]["passed"] is True
    sync = read_json(out / "sync.json")
    assert sync["rows"][0] == [0.0, pytest.approx(0.125)]


def test_simulate_rejects_bad_config(tmp_path):
    config = write_config(tmp_path / "bad.cfg", lambda_over_gamma=-1)
    out = tmp_path / "out"
    assert main(["simulate", "--config", config, "--out", str(out)]) == 2
    assert not (out / "amplitude.csv").exists()


def test_missing_config_file_is_input_error(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.cfg")]) == 2


def test_default_output_dir_comes_from_settings(isolated_settings, weak_config):
    assert main(["simulate", "--config", weak_config]) == 0
    assert (isolated_settings.output_dir / "amplitude.csv").exists()


def test_qfunc_mixed_state_is_flat(tmp_path, weak_config):
    out = tmp_path / "out"
    assert main(["qfunc", "--config", weak_config, "--out", str(out), "--times", "0.5", "--state", "mixed"]) == 0
    data = load_csv(out / "qgrid_t0.5.csv")
    assert np.allclose(data[:, 2], 1 / (4 * math.pi), atol=1e-15)
    report = read_json(out / "qgrid_report.json")
    assert report["snapshots"][0]["normalized"] is True
    assert report["snapshots"][0]["injected_state"] == "mixed"


def test_qfunc_initial_state_peaks_at_zero_phase(tmp_path, weak_config):
    out = tmp_path / "out"
    assert main(["qfunc", "--config", weak_config, "--out", str(out), "--times", "0", "1"]) == 0
    report = read_json(out / "qgrid_report.json")
    first, last = report["snapshots"]
    assert first["peak"]["phi"] == 0.0
    assert first["peak"]["theta"] == pytest.approx(math.pi / 2)
    assert abs(first["normalization"] - 1.0) < 1e-6
    assert (out / "qgrid_t1.csv").exists() and (out / "qgrid_t1.meta.json").exists()
    # Weak coupling pulls the peak toward the ground-state pole.
    assert last["peak"]["theta"] > first["peak"]["theta"]


def test_qfunc_rejects_times_outside_window(tmp_path, weak_config):
    assert main(["qfunc", "--config", weak_config, "--out", str(tmp_path), "--times", "5"]) == 2


def test_sync_reports_value_and_lifetime(tmp_path, weak_config):
    out = tmp_path / "out"
    assert main(["sync", "--config", weak_config, "--out", str(out)]) == 0
    data = load_csv(out / "sync.csv")
    assert data[0, 1] == pytest.approx(0.125)
    meta = read_json(out / "sync.meta.json")
    assert meta["sync_lifetime"] == 1.0
    assert meta["sync_epsilon"] == 0.01
    assert meta["backflow"]["count"] == 0


def test_sync_phase_override(tmp_path, weak_config):
    out = tmp_path / "out"
    assert main(["sync", "--config", weak_config, "--out", str(out), "--phi", str(math.pi)]) == 0
    assert load_csv(out / "sync.csv")[0, 1] == pytest.approx(-0.125)


def test_zeros_prints_table(capsys):
    assert main(["zeros", "--order", "0", "--count", "4"]) == 0
    output = capsys.readouterr().out
    assert "Zeros of J_0" in output
    for quoted in ("2.40483", "5.52008", "8.65373", "11.7915"):
        assert quoted in output


def test_zeros_rejects_negative_order():
    assert main(["zeros", "--order", "-1", "--count", "3"]) == 2


def test_unknown_figure_is_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["figures", "fig9"])
    assert excinfo.value.code == 2


def test_figures_rejects_bad_window(tmp_path):
    assert main(["figures", "fig8", "--t-max", "-1", "--out", str(tmp_path)]) == 2


def _run_fig8(out):
    assert main(["figures", "fig8", "--t-max", "20", "--out", str(out)]) == 0
    return {path.name: path.read_bytes() for path in sorted(out.iterdir())}


def test_fig8_records_exact_bessel_ratios(tmp_path):
    files = _run_fig8(tmp_path / "run")
    assert set(files) == {"fig8.meta.json", "plot_fig8.py", "fig8_a.csv", "fig8_b.csv", "fig8_c.csv", "fig8_d.csv"}
    meta = read_json(tmp_path / "run" / "fig8.meta.json")
    assert meta["rerun"] == ["figures", "fig8", "--t-max", "20.0"]
    for k, series in enumerate(meta["series"], start=1):
        assert series["params"]["d_over_omega"] == bessel.jn_zero(0, k)
        assert series["params"]["omega"] == 5.0
        assert series["sync_lifetime"] == 20.0
    script = files["plot_fig8.py"].decode("utf-8")
    assert "fig8_a.csv" in script and "matplotlib" in script
    compile(script, "plot_fig8.py", "exec")


def test_figures_are_byte_identical_across_runs(tmp_path):
    assert _run_fig8(tmp_path / "first") == _run_fig8(tmp_path / "second")


@pytest.mark.slow
def test_fig2_snapshots(tmp_path):
    out = tmp_path / "fig2"
    assert main(["figures", "fig2", "--out", str(out)]) == 0
    meta = read_json(out / "fig2.meta.json")
    assert [s["panel"] for s in meta["series"]] == ["a", "b", "c", "d"]
    assert all(abs(s["normalization"] - 1.0) < 1e-6 for s in meta["series"])
    assert meta["assumptions"]
    # Fast modulation relaxes to the unmodulated snapshot.
    unmodulated = load_csv(out / "fig2_b.csv")[:, 2]
    fast = load_csv(out / "fig2_d.csv")[:, 2]
    assert np.max(np.abs(fast - unmodulated)) <= 0.02 * np.max(unmodulated)


def test_sweep_writes_rows_and_summary(tmp_path):
    config = write_config(
        tmp_path / "sweep.cfg",
        lambda_over_gamma=0.01,
        d_over_gamma=5,
        t_max_gamma=10,
        n_steps=500,
        sweep_variable="omega",
        sweep_values="0.9, 2.1",
    )
    out = tmp_path / "out"
    assert main(["sweep", "--config", config, "--out", str(out), "--verify"]) == 0
    summary = read_json(out / "sweep.json")
    assert [row["value"] for row in summary["rows"]] == [0.9, 2.1]
    assert summary["rows"][0]["files"] == ["sweep_000.csv", "sweep_000.meta.json"]
    assert all(record["passed"] for record in summary["verification"])
    assert load_csv(out / "sweep_001.csv").shape == (501, 2)
