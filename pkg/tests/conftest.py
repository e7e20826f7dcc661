import numpy as np
import pytest

from src.constellation import make_qam4
from src.core import RngStream


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="run long Monte-Carlo tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return RngStream(1234, 7)


@pytest.fixture
def book2():
    return make_qam4(2)


@pytest.fixture
def channel_2x8(rng):
    h = rng.spawn("h")
    return (h.standard_normal((8, 2)) + 1j * h.standard_normal((8, 2))) / np.sqrt(2)


@pytest.fixture
def tiny_config():
    from src.harness import ExperimentConfig

    return ExperimentConfig(
        nt=2,
        nr=4,
        snr_db=(6.0, 12.0),
        scenario="additive",
        t=48,
        frames=2,
        seed=11,
        detectors=("coarse_ml", "model_driven", "data_driven", "naive_dnn"),
        emnl_iterations=3,
        epochs=4,
        warmup=2,
        hidden=(8, 8),
        record_timing=False,
    ).validate()
