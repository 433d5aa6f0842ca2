"""Base dataset generator class for all synthetic training sets."""

from abc import ABC, abstractmethod
from typing import Any, Dict, List

import numpy as np

from src.config.models import GeneratorConfig
from src.constants import MIN_SAMPLE_SEPARATION, SEED_COMPONENT_DATA
from src.exceptions import ConfigError, PreconditionError
from src.nn_core.dataset import TrainingSet
from src.utils.seeding import split_rng

# Sub-streams of the data component.
INPUT_STREAM = 0
LABEL_STREAM = 1


class BaseDatasetGenerator(ABC):
    """
    Abstract base class for dataset generators.

    All generators must inherit from this class and implement ``generate_labels``.
    Inputs are shared: uniform on [0, 1]^K, pairwise distinct.
    """

    def __init__(self, config: GeneratorConfig):
        """
        Initialize the generator.

        Args:
            config: Generator configuration object
        """
        self.config = config
        self.kind = config.generator.kind
        self.name = config.generator.name
        self.parameters: Dict[str, Any] = dict(config.parameters)

    @abstractmethod
    def generate_labels(
        self, X: np.ndarray, seed: int, label_seed: int, bandwidth: int
    ) -> np.ndarray:
        """
        Produce one label per input row.

        Args:
            X: Inputs (T x K)
            seed: Experiment seed
            label_seed: Extra label stream index
            bandwidth: Shell bound of planted frequencies

        Returns:
            Labels of length T
        """

    def sample_inputs(self, T: int, input_dim: int, seed: int) -> np.ndarray:
        """
        Draw T points uniformly in [0, 1]^K, redrawing points closer than the minimum
        separation to an earlier point.
        """
        rng = split_rng(seed, SEED_COMPONENT_DATA, INPUT_STREAM)
        X = rng.uniform(0.0, 1.0, size=(T, input_dim))
        while True:
            clashes = self._clashing_rows(X)
            if not clashes:
                return X
            X[clashes] = rng.uniform(0.0, 1.0, size=(len(clashes), input_dim))

    @staticmethod
    def _clashing_rows(X: np.ndarray) -> List[int]:
        diff = X[:, None, :] - X[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        close = np.tril(dist < MIN_SAMPLE_SEPARATION, k=-1)
        return [int(i) for i in np.flatnonzero(close.any(axis=1))]

    def generate(
        self, T: int, input_dim: int, seed: int, bandwidth: int = 1, label_seed: int = 0
    ) -> TrainingSet:
        """
        Generate a training set.

        Raises:
            PreconditionError: If T < 1 or input_dim < 1
        """
        if T < 1:
            raise PreconditionError(f"T must be >= 1, got {T}")
        if input_dim < 1:
            raise PreconditionError(f"input_dim must be >= 1, got {input_dim}")
        X = self.sample_inputs(T, input_dim, seed)
        y = self.generate_labels(X, seed, label_seed, bandwidth)
        return TrainingSet(X, y)

    def validate_required_parameters(self, required: List[str]) -> None:
        """
        Validate that all required parameters are present.

        Raises:
            ConfigError: If any required parameters are missing
        """
        missing = set(required) - set(self.parameters)
        if missing:
            raise ConfigError(f"Missing required parameters for {self.name}: {sorted(missing)}")
