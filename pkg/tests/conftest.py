"""Shared fixtures."""

import json

import numpy as np
import pytest

from src.config.settings import settings
from src.fourier.coefficients import CanonicalCoeffs
from src.nn_core.dataset import TrainingSet
from src.nn_core.network import Architecture
from src.trainer.init import InitScheme, init_random


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep logs and default outputs out of the working tree."""
    monkeypatch.setattr(settings.config, "log_file", None)
    monkeypatch.setattr(settings.config, "output_dir", str(tmp_path / "runs"))
    monkeypatch.setattr(settings.config, "export_parquet", False)
    monkeypatch.setattr(settings.config, "workers", 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_hermitian(rng):
    def make(idx, scale=1.0):
        raw = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
        return CanonicalCoeffs(idx, scale * raw).hermitianized()

    return make


@pytest.fixture
def tanh_net():
    return init_random(
        Architecture(1, (8,), "tanh"), InitScheme("center_cutting", scale=2.0), seed=5
    )


@pytest.fixture
def small_data():
    return TrainingSet([[0.2], [0.4], [0.55], [0.8]], [0.5, -0.3, 0.1, 0.7])


@pytest.fixture
def tiny_config(tmp_path):
    """A config that trains in well under a second."""
    return {
        "name": "tiny",
        "seed": 1,
        "network": {"input_dim": 1, "hidden_sizes": [4], "activation": "tanh"},
        "data": {"kind": "planted_fourier", "T": 3, "label_seed": 0, "coeff_bandwidth": 1},
        "canonical": {"per_dim_limits": [2]},
        "train": {"epochs": 20, "minibatch": 3, "lr0": 0.01, "decay": 0.0},
        "monitor": {"cadence": 5},
        "init": {"kind": "center_cutting", "scale": 1.0},
        "output_dir": str(tmp_path / "tiny"),
    }


@pytest.fixture
def write_config(tmp_path):
    def write(payload, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path

    return write
