"""The disparity matrix: row m holds the truncated Fourier coefficients of df_w/dw_m."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.exceptions import NumericalError, PreconditionError
from src.fourier.grids import FrequencyIndexSet, QuadratureGrid
from src.fourier.projection import dft_coefficients
from src.nn_core.network import Architecture, MlpNetwork, grad_weights_batch
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class DisparityMatrix:
    """
    H(w) as an (rows x N) complex matrix.

    ``weight_indices[r]`` is the flat weight index of row r; a full matrix has
    ``weight_indices == arange(M)``. Restricting rows represents frozen weights.
    """

    matrix: np.ndarray
    index_set: FrequencyIndexSet
    grid: QuadratureGrid
    architecture: Architecture
    weight_indices: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def is_complete(self) -> bool:
        return self.matrix.shape[0] == self.architecture.num_weights

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def row_for_weight(self, m: int) -> np.ndarray:
        hits = np.flatnonzero(self.weight_indices == m)
        if hits.size == 0:
            raise PreconditionError(f"Weight {m} has no row in this disparity matrix")
        return self.matrix[hits[0]]

    def to_frame(self) -> pd.DataFrame:
        """Long format (m, k_1..k_K, re, im), rows in weight order then enumeration order."""
        rows, N = self.matrix.shape
        freqs = self.index_set.frequencies
        columns = {"m": np.repeat(self.weight_indices, N)}
        for j in range(self.index_set.input_dim):
            columns[f"k_{j + 1}"] = np.tile(freqs[:, j], rows)
        columns["re"] = self.matrix.real.reshape(-1)
        columns["im"] = self.matrix.imag.reshape(-1)
        return pd.DataFrame(columns)


def build_disparity(
    net: MlpNetwork,
    idx: FrequencyIndexSet,
    grid: QuadratureGrid,
    weight_indices: Optional[Sequence[int]] = None,
) -> DisparityMatrix:
    """
    Evaluate all weight derivatives at every grid node in one Jacobian sweep and
    project each derivative function onto the index set.

    Args:
        net: Network
        idx: Index set N_eps
        grid: Quadrature grid satisfying the Nyquist constraint
        weight_indices: Optional subset of flat weights (rows); all weights by default

    Returns:
        DisparityMatrix

    Raises:
        PreconditionError: On Nyquist violation or dimension mismatch
        NumericalError: If a derivative is non-finite at a node
    """
    if net.input_dim != idx.input_dim:
        raise PreconditionError(f"Network input dimension {net.input_dim} does not match {idx}")
    grid.check_nyquist(idx)

    M = net.num_weights
    rows = np.arange(M) if weight_indices is None else np.asarray(weight_indices, dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= M):
        raise PreconditionError(f"weight_indices outside [0, {M})")

    J = grad_weights_batch(net, grid.nodes)
    if not np.all(np.isfinite(J)):
        raise NumericalError("Non-finite weight derivative at a quadrature node")

    H = dft_coefficients(J[:, rows].T, idx, grid)
    logger.debug(f"Built disparity matrix {H.shape} on {grid} for {net!r}")
    H.setflags(write=False)
    rows.setflags(write=False)
    return DisparityMatrix(H, idx, grid, net.architecture, rows)
