"""Numerical rank via a relative singular-value threshold."""

from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np

from src.constants import RANK_REL_TOL
from src.disparity.matrix import DisparityMatrix
from src.exceptions import NumericalError, PreconditionError


@dataclass(frozen=True, eq=False)
class RankReport:
    """Singular values (non-increasing), the rank above ``tolerance_used`` and sigma_min/sigma_max."""

    singular_values: np.ndarray
    numerical_rank: int
    tolerance_used: float
    sigma_min_over_sigma_max: float
    n_rows: int
    n_columns: int

    @property
    def is_full_rank(self) -> bool:
        """Full rank in the column sense: rank == N (needs M >= N)."""
        return self.numerical_rank == self.n_columns

    @property
    def rank_deficit(self) -> int:
        return self.n_columns - self.numerical_rank

    def to_dict(self) -> Dict[str, Any]:
        return {
            "singular_values": [float(s) for s in self.singular_values],
            "numerical_rank": int(self.numerical_rank),
            "tolerance_used": float(self.tolerance_used),
            "sigma_min_over_sigma_max": float(self.sigma_min_over_sigma_max),
            "n_rows": self.n_rows,
            "n_columns": self.n_columns,
            "full_rank": self.is_full_rank,
            # Hermitian coefficient vectors in C^N have N real degrees of freedom.
            "hermitian_real_dof": self.n_columns,
        }


def numerical_rank(
    H: Union[DisparityMatrix, np.ndarray], rel_tol: float = RANK_REL_TOL
) -> RankReport:
    """
    Count singular values above rel_tol * sigma_max * max(M, N).

    Raises:
        PreconditionError: If rel_tol is not in (0, 1)
        NumericalError: On non-finite entries or SVD non-convergence
    """
    if not 0.0 < rel_tol < 1.0:
        raise PreconditionError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    A = H.matrix if isinstance(H, DisparityMatrix) else np.asarray(H)
    if A.ndim != 2:
        raise PreconditionError(f"Expected a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericalError("Matrix contains NaN or Inf")

    M, N = A.shape
    if min(M, N) == 0:
        return RankReport(np.zeros(0), 0, 0.0, 0.0, M, N)
    try:
        s = np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"SVD did not converge: {e}") from e

    sigma_max = float(s[0])
    tolerance = rel_tol * sigma_max * max(M, N)
    rank = int(np.count_nonzero(s > tolerance))
    ratio = float(s[-1] / sigma_max) if sigma_max > 0 else 0.0
    s.setflags(write=False)
    return RankReport(s, rank, tolerance, ratio, M, N)
