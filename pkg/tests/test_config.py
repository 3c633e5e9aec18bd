import math

import pytest

from src.config import Settings, get_settings
from src.run_config import RunConfig, load_run_config, parse_run_config, serialize_run_config
from src.services.errors import ConfigError


def test_settings_defaults(isolated_settings, tmp_path):
    assert isolated_settings.sync_epsilon == 0.01
    assert isolated_settings.max_workers == 1
    assert isolated_settings.output_dir == tmp_path / "results"
    assert isolated_settings.log_level == "INFO"


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("FMQSYNC_MAX_WORKERS", "4")
    monkeypatch.setenv("LOG_LEVEL", " debug ")
    settings = get_settings(reload=True)
    assert settings.max_workers == 4
    assert settings.log_level == "DEBUG"
    assert get_settings() is settings


def test_settings_reject_invalid_values(monkeypatch):
    monkeypatch.setenv("FMQSYNC_SYNC_EPSILON", "0")
    with pytest.raises(ValueError):
        Settings()


def test_minimal_config_defaults():
    config = parse_run_config("lambda_over_gamma = 3\n")
    assert config.system_params().modulation_on is False
    assert config.grid().dt == pytest.approx(0.005)
    assert config.observables == ["amplitude"]
    assert config.initial_state().rho_eg == pytest.approx(0.5)


def test_config_round_trip():
    text = """
# strong coupling, near a J0 zero
lambda_over_gamma = 0.01
d_over_gamma = 5
omega_over_gamma = 0.9
t_max_gamma = 100
n_steps = 20000
phi = 0.25
c_e_abs = 0.6
c_g_abs = 0.8
c_e_arg = 1.2
observables = amplitude, sync, backflow
output_format = json
sweep_variable = omega
sweep_values = 0.9, 2.1, 50
snapshot_times = 0, 10, 100
"""
    config = parse_run_config(text)
    assert config.sweep_values == [0.9, 2.1, 50.0]
    assert config.initial_state().c_e == pytest.approx(0.6 * complex(math.cos(1.2), math.sin(1.2)))
    assert parse_run_config(serialize_run_config(config)) == config


@pytest.mark.parametrize("output_dir", ["runs #2", "o'brien/runs", "C:\\data\\runs", "plain"])
def test_config_round_trip_keeps_string_values(output_dir):
    config = RunConfig(lambda_over_gamma=1.0, output_dir=output_dir, sweep_variable="d")
    restored = parse_run_config(serialize_run_config(config))
    assert restored.output_dir == output_dir
    assert restored == config


def test_empty_observables_are_rejected():
    with pytest.raises(ValueError):
        RunConfig(lambda_over_gamma=1.0, observables=[])


def test_modulation_flag_overrides_inference():
    config = parse_run_config("lambda_over_gamma = 1\nd_over_gamma = 2\nomega_over_gamma = 1\nmodulation_on = false\n")
    assert config.system_params().modulation_on is False


@pytest.mark.parametrize(
    ("text", "line", "fragment"),
    [
        ("lambda_over_gamma = 1\nthis is not a binding\n", 2, "cannot parse"),
        ("lambda_over_gamma = 1\n\n\nd_over_gamma\n", 4, "has no value"),
        ("lambda_over_gamma = 1\ndetuning = 2\n", 2, "unknown key 'detuning'"),
        ("lambda_over_gamma = 1\n# comment\nlambda_over_gamma = 2\n", 3, "duplicate key"),
        ("d_over_gamma = 1\n\nlambda_over_gamma = -0.5\n", 3, "lambda_over_gamma"),
        ("lambda_over_gamma = 1\nn_steps = 1\n", 2, "n_steps"),
        ("lambda_over_gamma = 1\noutput_format = xml\n", 2, "output_format"),
        ("lambda_over_gamma = 1\nd_over_gamma = inf\n", 2, "d_over_gamma"),
        ("lambda_over_gamma = 1\nobservables =\n", 2, "observables"),
        ("lambda_over_gamma = 1\n# no omega\nmodulation_on = true\n", 3, "modulation_on: "),
        ("lambda_over_gamma = 1\n\nc_g_abs = 1\nc_e_re = 1\n", 3, "not both"),
        ("lambda_over_gamma = 1\nc_e_re = 1\nc_g_re = 1\n", 2, "not normalized"),
    ],
)
def test_config_errors_name_the_line(text, line, fragment):
    with pytest.raises(ConfigError) as excinfo:
        parse_run_config(text, "run.cfg")
    assert excinfo.value.line == line
    assert str(excinfo.value).startswith(f"run.cfg:{line}: ")
    assert fragment in str(excinfo.value)


@pytest.mark.parametrize(
    "text",
    [
        "d_over_gamma = 1\n",
        "lambda_over_gamma = 0\n",
        "lambda_over_gamma = 1\nmodulation_on = true\n",
        "lambda_over_gamma = 1\nc_e_re = 1\nc_g_abs = 1\n",
        "lambda_over_gamma = 1\nc_e_re = 1\nc_g_re = 1\n",
        "lambda_over_gamma = 1\nobservables = amplitude, wigner\n",
    ],
)
def test_invalid_configs_are_rejected(text):
    with pytest.raises(ConfigError):
        parse_run_config(text)


def test_sweep_keys_are_required_for_sweeps():
    with pytest.raises(ConfigError):
        parse_run_config("lambda_over_gamma = 1\n").sweep_spec()


def test_sweep_spec_from_config():
    config = parse_run_config(
        "lambda_over_gamma = 0.01\nsweep_variable = omega\nsweep_values = 0.05, 0.5, 5\nsweep_ratio_lock = 2.404825557695773\n"
    )
    spec = config.sweep_spec()
    assert spec.ratio_lock == 2.404825557695773
    assert spec.row_params(5.0).d == 2.404825557695773 * 5.0


def test_load_run_config_reports_missing_file(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        load_run_config(tmp_path / "missing.cfg")
    assert "missing.cfg" in str(excinfo.value)


def test_load_run_config_reads_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("lambda_over_gamma = 0.1\nomega_over_gamma = 5\nd_over_gamma = 12.02\n", encoding="utf-8")
    config = load_run_config(path)
    assert isinstance(config, RunConfig)
    assert config.system_params().ratio == pytest.approx(2.404)
