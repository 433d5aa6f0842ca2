"""Random labels dataset generator."""

import numpy as np

from datasets.base import LABEL_STREAM, BaseDatasetGenerator
from src.config.models import GeneratorConfig
from src.constants import SEED_COMPONENT_DATA
from src.exceptions import ConfigError
from src.utils.seeding import split_rng


class RandomLabelsGenerator(BaseDatasetGenerator):
    """Labels uniform in [low, high], whatever the inputs."""

    def __init__(self, config: GeneratorConfig):
        super().__init__(config)
        self.validate_required_parameters(["low", "high"])
        self.low = float(self.parameters["low"])
        self.high = float(self.parameters["high"])
        if not self.low < self.high:
            raise ConfigError(f"Label range [{self.low}, {self.high}] is empty")

    def generate_labels(
        self, X: np.ndarray, seed: int, label_seed: int, bandwidth: int
    ) -> np.ndarray:
        rng = split_rng(seed, SEED_COMPONENT_DATA, LABEL_STREAM, label_seed)
        return rng.uniform(self.low, self.high, size=X.shape[0])
