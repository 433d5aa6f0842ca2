"""Training sets on the unit hypercube."""

from pathlib import Path
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.constants import FLOAT_FORMAT
from src.exceptions import PreconditionError
from src.utils.logger import get_logger

logger = get_logger(__name__)


class TrainingSet:
    """T samples (x_t, y_t) with pairwise-distinct x_t in [0, 1]^K."""

    __slots__ = ("X", "y")

    def __init__(self, X, y):
        X = np.array(X, dtype=np.float64)
        y = np.array(y, dtype=np.float64).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[1] < 1:
            raise PreconditionError(f"Inputs must be a (T, K) array, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise PreconditionError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise PreconditionError("Training set contains NaN or Inf")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise PreconditionError("Training inputs must lie in [0, 1]^K")
        if X.shape[0] > 1 and np.unique(X, axis=0).shape[0] != X.shape[0]:
            raise PreconditionError("Training inputs must be pairwise distinct")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):
        raise AttributeError("TrainingSet is immutable")

    def __len__(self) -> int:
        return self.X.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrainingSet):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)

    def __repr__(self) -> str:
        return f"TrainingSet(T={len(self)}, K={self.input_dim})"

    @classmethod
    def from_pairs(cls, samples: Iterable[Tuple[Union[float, Sequence[float]], float]]):
        """Build from (x_t, y_t) pairs; scalar x_t means K = 1."""
        samples = list(samples)
        if not samples:
            raise PreconditionError("from_pairs needs at least one sample to infer K")
        X = [np.atleast_1d(np.asarray(x, dtype=np.float64)) for x, _ in samples]
        y = [float(t) for _, t in samples]
        return cls(np.vstack(X), y)

    @classmethod
    def empty(cls, input_dim: int) -> "TrainingSet":
        return cls(np.zeros((0, input_dim)), np.zeros(0))

    @property
    def input_dim(self) -> int:
        return self.X.shape[1]

    def subset(self, indices) -> "TrainingSet":
        indices = np.asarray(indices, dtype=np.int64)
        return TrainingSet(self.X[indices], self.y[indices])

    def min_separation(self) -> float:
        """Smallest pairwise Euclidean distance between inputs (inf for T < 2)."""
        if len(self) < 2:
            return float("inf")
        diff = self.X[:, None, :] - self.X[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        np.fill_diagonal(dist, np.inf)
        return float(dist.min())

    def to_frame(self) -> pd.DataFrame:
        columns = {f"x_{j + 1}": self.X[:, j] for j in range(self.input_dim)}
        columns["y"] = self.y
        return pd.DataFrame(columns)

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "TrainingSet":
        x_cols = sorted(
            (c for c in df.columns if c.startswith("x_")), key=lambda c: int(c.split("_")[1])
        )
        if not x_cols or "y" not in df.columns:
            raise PreconditionError(
                f"Training set frame needs x_1..x_K and y columns, got {list(df.columns)}"
            )
        return cls(df[x_cols].to_numpy(dtype=np.float64), df["y"].to_numpy(dtype=np.float64))

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
        logger.info(f"Wrote training set (T={len(self)}) to {path}")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "TrainingSet":
        logger.info(f"Loading training set from CSV: {path}")
        return cls.from_frame(pd.read_csv(path))
