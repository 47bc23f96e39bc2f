"""Tests for the HTTP service."""
from unittest.mock import Mock

import pytest
from fastapi.testclient import TestClient

from src.config import Config
from src.errors import PipelineError
from src.experiments import PipelineResult
from src.main import ExperimentRequest, ExperimentService, app


@pytest.fixture
def service():
    return ExperimentService(Config())


@pytest.fixture
def client(service):
    app.state.service = service
    return TestClient(app)


def test_health_check(client):
    response = client.get("/health")

    assert response.status_code == 200
    assert response.json() == {"status": "healthy"}


def test_list_experiments(client):
    response = client.get("/experiments")

    assert response.status_code == 200
    assert "verify-cluster" in response.json()["experiments"]


def test_unknown_experiment(client, config_data):
    response = client.post("/experiments/plot", json={"config": config_data})

    assert response.status_code == 404


def test_invalid_config_is_unprocessable(client, config_data):
    config_data["motion"]["alpha"] = 2.5

    response = client.post("/experiments/simulate", json={"config": config_data})

    assert response.status_code == 422
    assert "motion.alpha" in response.json()["detail"]


def test_request_validation(client, config_data):
    response = client.post("/experiments/simulate", json={"config": config_data, "seed": -1})

    assert response.status_code == 422


def test_run_experiment(client, service, config_data):
    # Arrange
    result = PipelineResult("simulate", ("t", "Z_mean"), passed=True)
    result.add_row(1.0, 2.75)
    result.derived["lambda"] = 1.0
    service.run = Mock(return_value=result)

    # Act
    response = client.post("/experiments/simulate", json={"config": config_data, "seed": 5})

    # Assert
    assert response.status_code == 200
    body = response.json()
    assert body["passed"] is True
    assert body["rows"] == [["1", "2.75"]]
    assert body["derived"] == {"lambda": "1"}
    name, request = service.run.call_args.args
    assert name == "simulate" and request.seed == 5


def test_pipeline_failure_is_a_server_error(client, service, config_data):
    service.run = Mock(side_effect=PipelineError("Pipeline simulate failed: boom"))

    response = client.post("/experiments/simulate", json={"config": config_data})

    assert response.status_code == 500


def test_service_runs_a_small_pipeline(service, config_data):
    request = ExperimentRequest(config=config_data, replications=20, t_grid=[0.5, 1.0, 1.5])

    result = service.run("simulate", request)

    assert result.name == "simulate"
    assert len(result.rows) == 3
    assert result.derived["lambda"] == 1.0
