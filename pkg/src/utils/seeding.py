"""Counter-based seed splitting.

Every random stream in an experiment derives from the single config seed by
appending a component index: ``SeedSequence([seed, component, *extra])``.
Streams for different components never overlap and adding a component never
shifts the others.
"""

import numpy as np


def split_rng(seed: int, component: int, *extra: int) -> np.random.Generator:
    """Return the generator for ``component`` (and optional sub-indices) of ``seed``."""
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence([seed, component, *extra]))


def split_seed(seed: int, component: int, *extra: int) -> int:
    """Derive a 63-bit integer seed for ``component`` of ``seed``."""
    state = np.random.SeedSequence([seed, component, *extra]).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))
