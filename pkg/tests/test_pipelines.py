"""End-to-end runs of the pipelines on small configs."""
import io
import math

import numpy as np
import pytest

from src.errors import ConfigError
from src.experiments import (
    ExperimentRunner,
    PipelineResult,
    RunOptions,
    fan_out,
    format_value,
    read_rows,
    run_pipeline,
    validate_config,
    write_csv,
    write_result,
)


def _square(r: int) -> int:
    return r * r


@pytest.fixture
def config(config_data):
    return validate_config(config_data)


def test_fan_out_keeps_replication_order():
    assert fan_out(_square, 20, 1) == [r * r for r in range(20)]
    assert fan_out(_square, 20, 3) == [r * r for r in range(20)]


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(-math.inf) == "-inf"
    assert format_value(True) == "true"
    assert format_value(np.int64(3)) == "3"
    assert format_value(None) == ""


def test_write_csv_layout(tmp_path):
    result = PipelineResult("demo", ("k", "value"), derived={"lambda": 1.0})
    result.add_row(1, 0.25)
    stream = io.StringIO()

    write_csv(result, stream, ["a = 1"])

    assert stream.getvalue() == "# a = 1\n# derived.lambda = 1\nk,value\n1,0.25\n"
    with pytest.raises(ValueError):
        result.add_row(1)


def test_run_options_validation():
    with pytest.raises(ConfigError):
        RunOptions(seed=-1)
    with pytest.raises(ConfigError):
        RunOptions(workers=0)


def test_unknown_pipeline(config):
    with pytest.raises(ConfigError):
        ExperimentRunner(config).run("plot")


@pytest.mark.integration
def test_simulate_pipeline(config, tmp_path):
    result, echo = run_pipeline(config, "simulate", RunOptions(seed=11))

    paths = write_result(result, tmp_path, echo)
    rows = read_rows(paths["csv"])

    assert [float(row["t"]) for row in rows] == [1.0, 1.5, 2.0]
    assert all(row["extinct_fraction"] == "0" for row in rows)
    assert "run.seed = 11" in echo
    assert result.derived["theta"] == 1.0


@pytest.mark.integration
def test_results_do_not_depend_on_worker_count(config):
    small = config.with_overrides(replications=24)

    serial, _ = run_pipeline(small, "simulate", RunOptions(seed=3, workers=1))
    parallel, _ = run_pipeline(small, "simulate", RunOptions(seed=3, workers=2))

    assert [[format_value(v) for v in row] for row in serial.rows] == [[format_value(v) for v in row] for row in parallel.rows]


@pytest.mark.integration
def test_seed_changes_results(config):
    first, _ = run_pipeline(config, "simulate", RunOptions(seed=1))
    second, _ = run_pipeline(config, "simulate", RunOptions(seed=2))

    assert first.rows != second.rows


@pytest.mark.integration
def test_verify_cluster_pipeline(config):
    result, _ = run_pipeline(config, "verify-cluster", RunOptions(seed=5))

    assert len(result.rows) == config.experiment.cluster_k_max + 1
    assert result.rows[-1][0] == f">{config.experiment.cluster_k_max}"
    assert sum(row[1] for row in result.rows) == config.experiment.cluster_draws
    assert 0.0 <= result.derived["p_value"] <= 1.0
    assert result.report[0].startswith("vartheta = 1.0")


@pytest.mark.integration
def test_simulate_at_time_zero(config):
    result, _ = run_pipeline(config.with_overrides(t_grid=[0.0]), "simulate")

    assert result.passed
    assert len(result.rows) == 1
    assert result.rows[0][2] == 1.0


@pytest.mark.integration
def test_simulate_checks_survival_of_W(config_data):
    config_data["offspring"]["probabilities"] = [0.25, 0.0, 0.75]
    config_data["experiment"].update({"w_horizon": 8.0, "w_check_draws": 300})
    config = validate_config(config_data)

    result, _ = run_pipeline(config, "simulate", RunOptions(seed=4))

    assert result.passed
    assert abs(result.derived["survival_fraction"] - 2.0 / 3.0) < 0.12
    assert "w_horizon_spread" in result.derived
    assert any(line.startswith("E W at horizon 4") for line in result.report)


@pytest.mark.integration
def test_diagnostics_rows(config_data):
    config_data["experiment"].update(
        {"replications": 400, "tail_draws": 200_000, "tail_quantile": 0.01, "jump_t_grid": [1.0, 1.5, 2.0]}
    )
    config = validate_config(config_data)

    result, _ = run_pipeline(config, "diagnostics", RunOptions(seed=8))

    many = next(row for row in result.rows if row[1] == "many_to_one")
    full_growth = next(row for row in result.rows if row[1] == "many_to_one_full_growth")
    jumps = [row for row in result.rows if row[1] == "jump_failure"]
    assert many[5] == 1.0 and many[7]
    assert full_growth[5] == pytest.approx(math.e)
    assert [row[0] for row in jumps] == [1.0, 1.5, 2.0]
    assert all(row[5] > 0 for row in jumps)


def test_scaled_pipelines_refuse_log_normalization(config_data):
    config_data["motion"] = {"kind": "stable", "alpha": 1.0, "c1": 1.0, "c2": 1.0}
    config_data["normalization"] = {"slowly_varying": "log", "power": 1.0}
    runner = ExperimentRunner(validate_config(config_data))

    for name in ("verify-max", "verify-laplace", "diagnostics"):
        with pytest.raises(ConfigError) as excinfo:
            runner.run(name)
        assert excinfo.value.field == "normalization.slowly_varying"
