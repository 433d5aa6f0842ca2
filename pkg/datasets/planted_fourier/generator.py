"""Planted Fourier dataset generator."""

import numpy as np

from datasets.base import LABEL_STREAM, BaseDatasetGenerator
from src.config.models import GeneratorConfig
from src.constants import SEED_COMPONENT_DATA
from src.exceptions import PreconditionError
from src.fourier.coefficients import CanonicalCoeffs
from src.fourier.grids import FrequencyIndexSet
from src.fourier.projection import partial_sum_components
from src.utils.seeding import split_rng


class PlantedFourierGenerator(BaseDatasetGenerator):
    """y_t = Re(sum_k theta*_k eta_k(x_t)) for a seeded Hermitian theta* with shells <= bandwidth."""

    def __init__(self, config: GeneratorConfig):
        super().__init__(config)
        self.validate_required_parameters(["scale", "decay_power"])
        self.scale = float(self.parameters["scale"])
        self.decay_power = float(self.parameters["decay_power"])

    def planted_coefficients(
        self, input_dim: int, bandwidth: int, seed: int, label_seed: int = 0
    ) -> CanonicalCoeffs:
        """The ground-truth coefficients behind ``generate`` for the same arguments."""
        if bandwidth < 0:
            raise PreconditionError(f"bandwidth must be non-negative, got {bandwidth}")
        idx = FrequencyIndexSet([bandwidth] * input_dim)
        rng = split_rng(seed, SEED_COMPONENT_DATA, LABEL_STREAM, label_seed)
        std = self.scale / (1.0 + idx.shells()) ** self.decay_power
        raw = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
        return CanonicalCoeffs(idx, std * raw).hermitianized()

    def generate_labels(
        self, X: np.ndarray, seed: int, label_seed: int, bandwidth: int
    ) -> np.ndarray:
        coeffs = self.planted_coefficients(X.shape[1], bandwidth, seed, label_seed)
        values, _ = partial_sum_components(coeffs, X)
        return values
