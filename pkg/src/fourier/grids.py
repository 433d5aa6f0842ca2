"""Truncation index sets N_eps and uniform quadrature grids."""

import itertools
import math
from typing import Dict, Iterable, Tuple

import numpy as np

from src.constants import GRID_FACTOR, GRID_OFFSET
from src.exceptions import PreconditionError


class FrequencyIndexSet:
    """
    All integer tuples k with |k_j| <= N_j, enumerated lexicographically
    (k_1 slowest, k_K fastest). Cardinality N = prod(2 N_j + 1).
    """

    def __init__(self, per_dim_limits: Iterable[int]):
        limits = tuple(int(n) for n in per_dim_limits)
        if not limits:
            raise PreconditionError("An index set needs at least one dimension")
        if any(n < 0 for n in limits):
            raise PreconditionError(f"per_dim_limits must be non-negative, got {limits}")
        self.per_dim_limits = limits
        freqs = np.array(
            list(itertools.product(*(range(-n, n + 1) for n in limits))), dtype=np.int64
        ).reshape(-1, len(limits))
        freqs.setflags(write=False)
        self.frequencies = freqs
        self._lookup: Dict[Tuple[int, ...], int] = {
            tuple(int(v) for v in k): i for i, k in enumerate(freqs)
        }
        self._negation = np.array([self._lookup[tuple(int(v) for v in -k)] for k in freqs])
        self._negation.setflags(write=False)

    def __len__(self) -> int:
        return self.frequencies.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrequencyIndexSet):
            return NotImplemented
        return self.per_dim_limits == other.per_dim_limits

    def __hash__(self):
        return hash(self.per_dim_limits)

    def __repr__(self) -> str:
        return f"FrequencyIndexSet({list(self.per_dim_limits)}, N={len(self)})"

    @property
    def input_dim(self) -> int:
        return len(self.per_dim_limits)

    @property
    def cardinality(self) -> int:
        return math.prod(2 * n + 1 for n in self.per_dim_limits)

    def index_of(self, k) -> int:
        key = tuple(int(v) for v in np.atleast_1d(k))
        if key not in self._lookup:
            raise PreconditionError(f"Frequency {key} is not in {self}")
        return self._lookup[key]

    def negation_permutation(self) -> np.ndarray:
        """``perm[n]`` is the enumeration index of ``-k_n``."""
        return self._negation

    def shells(self) -> np.ndarray:
        """max_j |k_j| for every enumerated frequency."""
        return np.max(np.abs(self.frequencies), axis=1)


class QuadratureGrid:
    """Uniform tensor grid with nodes x_j in {0, 1/G_j, ..., (G_j - 1)/G_j}."""

    def __init__(self, points_per_dim: Iterable[int]):
        points = tuple(int(g) for g in points_per_dim)
        if not points or any(g < 1 for g in points):
            raise PreconditionError(f"points_per_dim must be positive, got {points}")
        self.points_per_dim = points
        axes = [np.arange(g, dtype=np.float64) / g for g in points]
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([m.reshape(-1) for m in mesh], axis=1)
        nodes.setflags(write=False)
        self.nodes = nodes

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuadratureGrid):
            return NotImplemented
        return self.points_per_dim == other.points_per_dim

    def __hash__(self):
        return hash(self.points_per_dim)

    def __repr__(self) -> str:
        return f"QuadratureGrid({list(self.points_per_dim)})"

    @classmethod
    def for_index_set(
        cls, idx: FrequencyIndexSet, factor: int = GRID_FACTOR, offset: int = GRID_OFFSET
    ) -> "QuadratureGrid":
        """Default grid G_j = factor * N_j + offset (twice the Nyquist minimum)."""
        return cls(factor * n + offset for n in idx.per_dim_limits)

    @property
    def input_dim(self) -> int:
        return len(self.points_per_dim)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.points_per_dim

    @property
    def size(self) -> int:
        return math.prod(self.points_per_dim)

    def satisfies_nyquist(self, idx: FrequencyIndexSet) -> bool:
        if idx.input_dim != self.input_dim:
            return False
        return all(g >= 2 * n + 2 for g, n in zip(self.points_per_dim, idx.per_dim_limits))

    def check_nyquist(self, idx: FrequencyIndexSet) -> None:
        """
        Raises:
            PreconditionError: If G_j < 2 N_j + 2 in any dimension
        """
        if idx.input_dim != self.input_dim:
            raise PreconditionError(
                f"{self} has dimension {self.input_dim} but {idx} has {idx.input_dim}"
            )
        for j, (g, n) in enumerate(zip(self.points_per_dim, idx.per_dim_limits)):
            if g < 2 * n + 2:
                raise PreconditionError(
                    f"Nyquist constraint violated in dimension {j}: G={g} < 2*{n}+2"
                )

    def refined(self, factor: int = 2) -> "QuadratureGrid":
        return QuadratureGrid(g * factor for g in self.points_per_dim)


def default_truncation(T: int, input_dim: int) -> Tuple[FrequencyIndexSet, QuadratureGrid]:
    """
    Smallest symmetric box with N >= T, paired with the grid G_j = 4 N_j + 4.

    Args:
        T: Number of training samples
        input_dim: K

    Returns:
        (index set, grid)
    """
    if T < 1:
        raise PreconditionError(f"T must be at least 1, got {T}")
    n = 0
    while (2 * n + 1) ** input_dim < T:
        n += 1
    idx = FrequencyIndexSet([n] * input_dim)
    return idx, QuadratureGrid.for_index_set(idx)
