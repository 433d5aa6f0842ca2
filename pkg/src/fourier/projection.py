"""Fourier coefficients, partial sums and truncation error on [0, 1]^K.

Coefficients use the convention theta_k = integral f(x) exp(-2 pi i k.x) dx and
partial sums f_hat(x) = sum_k theta_k exp(2 pi i k.x). The integral is the
rectangle rule on a uniform tensor grid, which is exactly a K-dimensional DFT of
the node values; it is computed with an FFT so many functions share one pass.
"""

from typing import Callable, List, Tuple

import numpy as np

from src.exceptions import NumericalError, PreconditionError
from src.fourier.coefficients import CanonicalCoeffs
from src.fourier.grids import FrequencyIndexSet, QuadratureGrid
from src.nn_core.network import MlpNetwork, as_points, forward_batch
from src.utils.logger import get_logger

logger = get_logger(__name__)

# f maps a (P, K) array of points to P real values.
Evaluable = Callable[[np.ndarray], np.ndarray]


def dft_coefficients(values: np.ndarray, idx: FrequencyIndexSet, grid: QuadratureGrid) -> np.ndarray:
    """
    Rectangle-rule coefficients for one or many sampled functions.

    Args:
        values: Node values of shape (..., P) in grid node order
        idx: Index set
        grid: Grid the values were sampled on (Nyquist must hold)

    Returns:
        Complex array of shape (..., N)
    """
    grid.check_nyquist(idx)
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != grid.size:
        raise PreconditionError(f"Expected {grid.size} node values, got {values.shape[-1]}")
    if not np.all(np.isfinite(values)):
        raise NumericalError("Function values at quadrature nodes contain NaN or Inf")
    lead = values.shape[:-1]
    arr = values.reshape(*lead, *grid.shape)
    axes = tuple(range(len(lead), len(lead) + grid.input_dim))
    spectrum = np.fft.fftn(arr, axes=axes) / grid.size
    picks = tuple(
        np.mod(idx.frequencies[:, j], grid.shape[j]) for j in range(grid.input_dim)
    )
    return spectrum[(Ellipsis, *picks)]


def fourier_coefficients(f: Evaluable, idx: FrequencyIndexSet, grid: QuadratureGrid) -> CanonicalCoeffs:
    """
    theta_k ~ (1/prod G_j) sum over nodes of f(x) exp(-2 pi i k.x).

    Exact when f is a trigonometric polynomial of bandwidth <= N_j per dimension.

    Raises:
        PreconditionError: If the grid violates the Nyquist constraint for idx
        NumericalError: If f is non-finite at any node
    """
    grid.check_nyquist(idx)
    values = np.asarray(f(grid.nodes), dtype=np.float64).reshape(-1)
    return CanonicalCoeffs(idx, dft_coefficients(values, idx, grid), grid)


def project_network(net: MlpNetwork, idx: FrequencyIndexSet, grid: QuadratureGrid) -> CanonicalCoeffs:
    """The network's representation in the truncated canonical space."""
    if net.input_dim != idx.input_dim:
        raise PreconditionError(
            f"Network input dimension {net.input_dim} does not match {idx}"
        )
    return fourier_coefficients(lambda X: forward_batch(net, X), idx, grid)


def basis_matrix(idx: FrequencyIndexSet, X) -> np.ndarray:
    """eta_k(x_t) = exp(2 pi i k.x_t) for every point (rows) and frequency (columns)."""
    X = as_points(idx.input_dim, X)
    return np.exp(2j * np.pi * (X @ idx.frequencies.T.astype(np.float64)))


def partial_sum_components(coeffs: CanonicalCoeffs, X) -> Tuple[np.ndarray, np.ndarray]:
    """Real part and imaginary residue of sum_k theta_k exp(2 pi i k.x) at each row of X."""
    s = basis_matrix(coeffs.index_set, X) @ coeffs.values
    return s.real, s.imag


def partial_sum_eval(coeffs: CanonicalCoeffs, x) -> float:
    """Re(sum_k theta_k exp(2 pi i k.x)) at a single point."""
    X = as_points(coeffs.index_set.input_dim, x)
    if X.shape[0] != 1:
        raise PreconditionError(f"partial_sum_eval expects a single point, got {X.shape[0]}")
    re, _ = partial_sum_components(coeffs, X)
    return float(re[0])


def partial_sum_on_grid(coeffs: CanonicalCoeffs, grid: QuadratureGrid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Partial sum at every node of ``grid`` via an inverse FFT.

    Requires G_j >= 2 N_j + 1 so every frequency lands in its own bin.
    """
    idx = coeffs.index_set
    if grid.input_dim != idx.input_dim:
        raise PreconditionError(f"{grid} does not match {idx}")
    if any(g < 2 * n + 1 for g, n in zip(grid.shape, idx.per_dim_limits)):
        raise PreconditionError(f"{grid} is too coarse to evaluate partial sums of {idx}")
    spectrum = np.zeros(grid.shape, dtype=np.complex128)
    picks = tuple(np.mod(idx.frequencies[:, j], grid.shape[j]) for j in range(idx.input_dim))
    spectrum[picks] = coeffs.values
    s = np.fft.ifftn(spectrum) * grid.size
    s = s.reshape(-1)
    return s.real, s.imag


def truncation_error(f: Evaluable, coeffs: CanonicalCoeffs, eval_grid: QuadratureGrid) -> float:
    """
    Rectangle-rule estimate of the squared L2 error between f and the partial sum.

    The evaluation grid must be at least twice as fine per dimension as the grid
    the coefficients came from (or as the Nyquist minimum 2 N_j + 2 when they
    were not computed on a grid).

    Raises:
        PreconditionError: If eval_grid is too coarse
    """
    idx = coeffs.index_set
    if eval_grid.input_dim != idx.input_dim:
        raise PreconditionError(f"{eval_grid} does not match {idx}")
    reference = (
        coeffs.grid.shape if coeffs.grid is not None
        else tuple(2 * n + 2 for n in idx.per_dim_limits)
    )
    for j, (g, ref) in enumerate(zip(eval_grid.shape, reference)):
        if g < 2 * ref:
            raise PreconditionError(
                f"Evaluation grid too coarse in dimension {j}: {g} < 2*{ref}"
            )
    values = np.asarray(f(eval_grid.nodes), dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(values)):
        raise NumericalError("Function values at evaluation nodes contain NaN or Inf")
    approx, _ = partial_sum_on_grid(coeffs, eval_grid)
    diff = values - approx
    return float(np.mean(diff * diff))


def decay_profile(coeffs: CanonicalCoeffs) -> List[Tuple[int, float]]:
    """Largest |theta_k| on each shell max_j |k_j| = s, in shell order."""
    shells = coeffs.index_set.shells()
    magnitudes = np.abs(coeffs.values)
    return [
        (int(s), float(magnitudes[shells == s].max()))
        for s in range(int(shells.max()) + 1)
    ]


def select_truncation(
    f: Evaluable, input_dim: int, eps: float, max_limit: int = 64
) -> Tuple[FrequencyIndexSet, QuadratureGrid, float]:
    """
    Smallest symmetric box whose measured squared truncation error is at most eps^2.

    Returns:
        (index set, coefficient grid, measured error)

    Raises:
        NumericalError: If no box up to ``max_limit`` reaches the precision
    """
    if eps <= 0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    error = float("inf")
    for n in range(max_limit + 1):
        idx = FrequencyIndexSet([n] * input_dim)
        grid = QuadratureGrid.for_index_set(idx)
        coeffs = fourier_coefficients(f, idx, grid)
        error = truncation_error(f, coeffs, grid.refined(2))
        logger.debug(f"Truncation N_j={n}: squared L2 error {error:.3e}")
        if error <= eps * eps:
            return idx, grid, error
    raise NumericalError(
        f"No symmetric box up to N_j={max_limit} reaches eps={eps} (last error {error:.3e})"
    )
