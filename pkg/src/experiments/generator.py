"""Synthetic dataset generation through the generator registry."""

import importlib

from datasets.base import BaseDatasetGenerator
from src.config.settings import settings
from src.exceptions import ConfigError
from src.nn_core.dataset import TrainingSet
from src.utils.logger import get_logger

logger = get_logger(__name__)


def load_generator(kind: str) -> BaseDatasetGenerator:
    """
    Dynamically load the generator registered for ``kind``.

    Raises:
        ConfigError: If the kind is unknown or disabled
    """
    entry = settings.get_registry().get_enabled_datasets().get(kind)
    if entry is None:
        raise ConfigError(f"Dataset kind '{kind}' is not registered or not enabled")

    try:
        module_path, class_name = entry.generator_class.rsplit(".", 1)
        module = importlib.import_module(module_path)
        generator_class = getattr(module, class_name)
        return generator_class(settings.get_generator_config(kind))
    except Exception as e:
        logger.error(f"Failed to load generator {entry.generator_class}: {e}")
        raise


def gen_synthetic_dataset(
    kind: str, T: int, input_dim: int, seed: int, bandwidth: int = 1, label_seed: int = 0
) -> TrainingSet:
    """
    Generate T pairwise-distinct samples on [0, 1]^K with labels of the given kind.

    Args:
        kind: ``planted_fourier`` or ``random_labels``
        T: Number of samples
        input_dim: K
        seed: Experiment seed
        bandwidth: Shell bound of the planted coefficients
        label_seed: Extra label stream index

    Returns:
        TrainingSet
    """
    generator = load_generator(kind)
    data = generator.generate(T, input_dim, seed, bandwidth=bandwidth, label_seed=label_seed)
    logger.info(f"Generated {data!r} with {generator.name}")
    return data
