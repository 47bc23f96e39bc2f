"""Tests for the command-line surface."""
import argparse
from unittest.mock import Mock, patch

import pytest
import yaml

from src.cli import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, _seed, _t_grid, build_parser, main, run
from src.errors import PipelineError
from src.experiments import PipelineResult, read_rows


@pytest.fixture
def config_file(tmp_path, config_data):
    path = tmp_path / "experiment.yaml"
    path.write_text(yaml.safe_dump(config_data))
    return path


@pytest.fixture
def passing_result():
    result = PipelineResult("simulate", ("t", "value"))
    result.add_row(1.0, 0.5)
    result.note("t=1: ok")
    return result


def test_seed_accepts_hex_and_decimal():
    assert _seed("0xB1EF") == 0xB1EF
    assert _seed("17") == 17
    with pytest.raises(argparse.ArgumentTypeError):
        _seed(str(2**64))


def test_t_grid_parsing():
    assert _t_grid("4,6, 8") == [4.0, 6.0, 8.0]
    with pytest.raises(argparse.ArgumentTypeError):
        _t_grid("4,six")


def test_parser_defaults():
    args = build_parser().parse_args(["simulate", "cfg.yaml"])

    assert args.seed == 0xB1EF
    assert args.workers == 1
    assert args.t_grid is None


def test_parser_rejects_unknown_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["plot", "cfg.yaml"])


def test_missing_config_is_an_error(tmp_path):
    assert run(tmp_path / "absent.yaml", "simulate", out_dir=tmp_path) == EXIT_ERROR


def test_invalid_config_is_an_error(tmp_path, config_data):
    config_data["offspring"]["probabilities"] = [0.9, 0.0, 0.3]
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(config_data))

    assert run(path, "simulate", out_dir=tmp_path) == EXIT_ERROR


@patch("src.cli.ExperimentRunner")
def test_pipeline_error_exits_with_one(mock_runner_cls, config_file, tmp_path):
    # Arrange
    mock_runner = Mock()
    mock_runner.run.side_effect = PipelineError("Pipeline simulate failed: boom")
    mock_runner_cls.return_value = mock_runner

    # Act
    code = run(config_file, "simulate", out_dir=tmp_path / "out")

    # Assert
    assert code == EXIT_ERROR
    assert not (tmp_path / "out").exists()


@patch("src.cli.ExperimentRunner")
def test_failed_check_exits_with_two(mock_runner_cls, config_file, tmp_path, passing_result):
    # Arrange
    passing_result.passed = False
    mock_runner = Mock()
    mock_runner.run.return_value = passing_result
    mock_runner.echo.return_value = ["seed = 1"]
    mock_runner_cls.return_value = mock_runner

    # Act
    code = run(config_file, "simulate", out_dir=tmp_path)

    # Assert
    assert code == EXIT_FAIL
    assert (tmp_path / "simulate.txt").read_text().startswith("simulate: FAIL")


@patch("src.cli.ExperimentRunner")
def test_passing_run_writes_csv_and_report(mock_runner_cls, config_file, tmp_path, passing_result, capsys):
    # Arrange
    mock_runner = Mock()
    mock_runner.run.return_value = passing_result
    mock_runner.echo.return_value = ["experiment.replications = 200", "run.seed = 7"]
    mock_runner_cls.return_value = mock_runner

    # Act
    code = run(config_file, "simulate", seed=7, out_dir=tmp_path, replications=50, t_grid=[2.0])

    # Assert
    assert code == EXIT_PASS
    config, options = mock_runner_cls.call_args.args
    assert config.experiment.replications == 50
    assert config.experiment.t_grid == [2.0]
    assert options.seed == 7
    lines = (tmp_path / "simulate.csv").read_text().splitlines()
    assert lines[:2] == ["# experiment.replications = 200", "# run.seed = 7"]
    assert read_rows(tmp_path / "simulate.csv") == [{"t": "1", "value": "0.5"}]
    assert "simulate: PASS" in capsys.readouterr().out


def test_main_parses_arguments(mocker, config_file, tmp_path):
    mocker.patch("src.cli.configure_logging")
    mock_run = mocker.patch("src.cli.run", return_value=EXIT_PASS)

    code = main(["verify-cluster", str(config_file), "--seed", "0x10", "--workers", "2", "--out-dir", str(tmp_path)])

    assert code == EXIT_PASS
    kwargs = mock_run.call_args.kwargs
    assert kwargs["seed"] == 16
    assert kwargs["workers"] == 2
    assert mock_run.call_args.args[1] == "verify-cluster"
