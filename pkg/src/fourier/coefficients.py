"""Canonical coefficient vectors theta_eps aligned with an index set."""

from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from src.constants import FLOAT_FORMAT, HERMITIAN_TOL
from src.exceptions import NumericalError, PreconditionError
from src.fourier.grids import FrequencyIndexSet, QuadratureGrid


class CanonicalCoeffs:
    """
    Complex coefficients theta_k for k in the index set, in enumeration order.

    ``grid`` records the quadrature grid the coefficients were computed on, or is
    None for coefficients produced by a solver.
    """

    __slots__ = ("index_set", "values", "grid")

    def __init__(
        self,
        index_set: FrequencyIndexSet,
        values,
        grid: Optional[QuadratureGrid] = None,
    ):
        v = np.array(values, dtype=np.complex128).reshape(-1)
        if v.shape[0] != len(index_set):
            raise PreconditionError(
                f"{v.shape[0]} coefficients do not match {index_set}"
            )
        if not np.all(np.isfinite(v)):
            raise NumericalError("Canonical coefficients contain NaN or Inf")
        v.setflags(write=False)
        object.__setattr__(self, "index_set", index_set)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "grid", grid)

    def __setattr__(self, name, value):
        raise AttributeError("CanonicalCoeffs is immutable")

    def __repr__(self) -> str:
        return f"CanonicalCoeffs({self.index_set!r})"

    def __len__(self) -> int:
        return self.values.shape[0]

    def _check_compatible(self, other: "CanonicalCoeffs") -> None:
        if not isinstance(other, CanonicalCoeffs):
            raise PreconditionError(f"Cannot combine coefficients with {type(other).__name__}")
        if self.index_set != other.index_set:
            raise PreconditionError(
                f"Index set mismatch: {self.index_set} vs {other.index_set}"
            )

    def __add__(self, other: "CanonicalCoeffs") -> "CanonicalCoeffs":
        self._check_compatible(other)
        return CanonicalCoeffs(self.index_set, self.values + other.values)

    def __sub__(self, other: "CanonicalCoeffs") -> "CanonicalCoeffs":
        self._check_compatible(other)
        return CanonicalCoeffs(self.index_set, self.values - other.values)

    def __mul__(self, scalar) -> "CanonicalCoeffs":
        return CanonicalCoeffs(self.index_set, self.values * scalar, self.grid)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, index_set: FrequencyIndexSet) -> "CanonicalCoeffs":
        return cls(index_set, np.zeros(len(index_set), dtype=np.complex128))

    def coefficient(self, k) -> complex:
        return complex(self.values[self.index_set.index_of(k)])

    def hermitian_defect(self) -> float:
        """max_k |theta_{-k} - conj(theta_k)|; zero for real-valued functions."""
        neg = self.index_set.negation_permutation()
        return float(np.max(np.abs(self.values[neg] - np.conj(self.values))))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermitian_defect() <= tol

    def hermitianized(self) -> "CanonicalCoeffs":
        """Nearest Hermitian-symmetric coefficients (orthogonal projection)."""
        neg = self.index_set.negation_permutation()
        return CanonicalCoeffs(
            self.index_set, 0.5 * (self.values + np.conj(self.values[neg])), self.grid
        )

    def energy(self) -> float:
        """sum |theta_k|^2, the Parseval estimate of the integral of f^2."""
        return float(np.sum(np.abs(self.values) ** 2))

    def to_frame(self) -> pd.DataFrame:
        freqs = self.index_set.frequencies
        columns = {f"k_{j + 1}": freqs[:, j] for j in range(self.index_set.input_dim)}
        columns["re"] = self.values.real
        columns["im"] = self.values.imag
        return pd.DataFrame(columns)

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "CanonicalCoeffs":
        k_cols = sorted(
            (c for c in df.columns if c.startswith("k_")), key=lambda c: int(c.split("_")[1])
        )
        freqs = df[k_cols].to_numpy(dtype=np.int64)
        limits = np.max(np.abs(freqs), axis=0)
        idx = FrequencyIndexSet(limits)
        values = np.zeros(len(idx), dtype=np.complex128)
        for k, re, im in zip(freqs, df["re"], df["im"]):
            values[idx.index_of(k)] = complex(re, im)
        return cls(idx, values)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return path
