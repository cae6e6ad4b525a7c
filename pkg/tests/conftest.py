"""
"""

import os

from pathlib import Path
from typing import Callable, Generator, Tuple

import numpy as np
import pytest

from loguru import logger

from ksd.network import Batch, LossKind, NetworkSpec, init_params
from ksd.harness.oracles import random_batch, small_net

from . import linear_regression


@pytest.fixture(autouse=True)
def quiet_logging() -> Generator[None, None, None]:
    logger.disable("ksd")
    yield


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(params=list(LossKind), ids=lambda kind: kind.value)
def tiny_problem(request, rng) -> Tuple[NetworkSpec, np.ndarray, Batch]:
    """A 4-3-2 net, parameters and a six sample batch for each loss."""
    spec = small_net(request.param)
    theta = init_params(spec, seed=7, scale=2.0) + 0.1 * rng.standard_normal(spec.num_params)
    return spec, theta, random_batch(spec, rng, 6)


@pytest.fixture()
def classifier_problem(rng) -> Tuple[NetworkSpec, np.ndarray, Batch]:
    spec = NetworkSpec.from_string("6-5-3", LossKind.softmax_cross_entropy)
    batch = random_batch(spec, rng, 60)
    return spec, init_params(spec, seed=3), batch


@pytest.fixture()
def autoencoder_problem(rng) -> Tuple[NetworkSpec, np.ndarray, Batch]:
    spec = NetworkSpec.autoencoder([8, 4, 2])
    inputs = (rng.uniform(size=(50, 8)) > 0.5).astype(float)
    return spec, init_params(spec, seed=5), Batch(inputs, inputs)


@pytest.fixture()
def quadratic5() -> Tuple[NetworkSpec, Batch]:
    return linear_regression(5, seed=11)


@pytest.fixture()
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """Writes `key = value` lines to a config file in tmp_path."""

    def writer(text: str = "", name: str = "experiment.conf", **values) -> Path:
        lines = [text] + [f"{key} = {value}" for key, value in values.items()]
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n")
        return path

    return writer


@pytest.fixture(scope="session")
def mnist_dir() -> Path:
    """Directory with the official MNIST IDX files, else skip."""
    location = os.environ.get("KSD_MNIST_DIR")
    if not location or not Path(location).is_dir():
        pytest.skip("KSD_MNIST_DIR not set")
    return Path(location)
