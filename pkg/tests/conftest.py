"""Common test fixtures and utilities."""
from typing import List

import numpy as np
import pytest
from _pytest.nodes import Item

from src.branching import BranchingConfig, OffspringLaw, build_limit_spec
from src.levy_motion import StrictlyStable, tail_scale
from src.rng import replication_stream

MODULE_MARKERS = {
    "test_levy_motion": "motion",
    "test_branching": "branching",
    "test_normalization": "normalization",
    "test_tree": "tree",
    "test_limit": "limit",
    "test_verify": "verify",
    "test_kpp": "kpp",
    "test_cli": "cli",
    "test_api": "api",
    "test_config": "config",
    "test_pipelines": "integration",
}


def pytest_collection_modifyitems(items: List[Item]) -> None:
    """Add component markers from the module name; anything not marked integration is a unit test."""
    for item in items:
        for module, marker in MODULE_MARKERS.items():
            if module in item.nodeid:
                item.add_marker(getattr(pytest.mark, marker))
        if item.get_closest_marker("integration") is None:
            item.add_marker(pytest.mark.unit)


@pytest.fixture
def rng():
    """A fresh Philox stream with a fixed seed."""
    return replication_stream(20240611, 0, "tests")


@pytest.fixture
def make_rng():
    """Streams keyed by replication index, for tests that need several."""
    def factory(replication: int = 0, tag: str = "tests") -> np.random.Generator:
        return replication_stream(20240611, replication, tag)
    return factory


@pytest.fixture
def yule():
    return BranchingConfig(OffspringLaw((0.0, 0.0, 1.0)), beta=1.0)


@pytest.fixture
def binary_with_death():
    """p0 = 0.25, p2 = 0.75: lambda = 0.5, extinction probability 1/3."""
    return BranchingConfig(OffspringLaw((0.25, 0.0, 0.75)), beta=1.0)


@pytest.fixture
def stable15():
    return StrictlyStable(alpha=1.5, c1=1.0, c2=1.0)


@pytest.fixture
def yule_limit(yule, stable15):
    return build_limit_spec(yule, tail_scale(stable15))


@pytest.fixture
def config_data():
    """A small, fast experiment config as a plain mapping."""
    return {
        "offspring": {"probabilities": [0.0, 0.0, 1.0], "beta": 1.0},
        "motion": {"kind": "stable", "alpha": 1.5, "c1": 1.0, "c2": 1.0},
        "experiment": {
            "replications": 200,
            "t_grid": [1.0, 1.5, 2.0],
            "truncation": 0.05,
            "cluster_draws": 20000,
            "cluster_chunk": 5000,
            "limit_draws": 2000,
            "limit_chunk": 500,
        },
    }
