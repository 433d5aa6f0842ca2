"""Zero-loss interpolation, convex gradient descent and convexity audits for Q(theta)."""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Literal, Optional

import numpy as np

from src.constants import CONDITION_FLAG_THRESHOLD, CONVEXITY_SLACK, SINGULAR_RCOND
from src.exceptions import NumericalError, PreconditionError
from src.fourier.coefficients import CanonicalCoeffs
from src.fourier.grids import FrequencyIndexSet
from src.fourier.projection import basis_matrix
from src.nn_core.dataset import TrainingSet
from src.nn_core.loss import check_loss, mse_value
from src.utils.logger import get_logger

logger = get_logger(__name__)

SolverName = Literal["min_norm_direct", "gradient_descent"]


@dataclass(frozen=True, eq=False)
class CanonicalFitResult:
    coeffs: CanonicalCoeffs
    final_loss: float
    iterations: int
    solver: SolverName
    condition_number: float = float("nan")
    ill_conditioned: bool = False
    loss_history: List[float] = field(default_factory=list)

    def to_dict(self, coeffs_file: Optional[str] = None) -> Dict[str, Any]:
        return {
            "solver": self.solver,
            "final_loss": self.final_loss,
            "iterations": self.iterations,
            "coeffs_file": coeffs_file,
            "condition_number": self.condition_number,
            "ill_conditioned": self.ill_conditioned,
        }


def canonical_loss(coeffs: CanonicalCoeffs, data: TrainingSet, loss: str = "mse") -> float:
    """Q(theta) = sum_t l(y_t, Re(sum_k theta_k eta_k(x_t)))."""
    check_loss(loss)
    if len(data) == 0:
        raise PreconditionError("Cannot evaluate the loss on an empty training set")
    predictions = (basis_matrix(coeffs.index_set, data.X) @ coeffs.values).real
    return mse_value(predictions, data.y)


def _check_data(data: TrainingSet, idx: FrequencyIndexSet) -> None:
    if len(data) == 0:
        raise PreconditionError("Training set is empty")
    if data.input_dim != idx.input_dim:
        raise PreconditionError(f"Training inputs have dimension {data.input_dim}, {idx} has {idx.input_dim}")


def solve_zero_loss(data: TrainingSet, idx: FrequencyIndexSet) -> CanonicalFitResult:
    """
    Minimum-norm solution of sum_k theta_k eta_k(x_t) = y_t via the SVD pseudoinverse.

    With N = T and a nonsingular system the solution is the unique global minimum.

    Raises:
        PreconditionError: If N < T, the data is empty or inputs repeat
        NumericalError: If an N = T system is numerically singular
    """
    _check_data(data, idx)
    T, N = len(data), len(idx)
    if N < T:
        raise PreconditionError(f"N = {N} < T = {T}: zero loss is not guaranteed")
    if np.unique(data.X, axis=0).shape[0] != T:
        raise PreconditionError("Training inputs must be pairwise distinct")

    B = basis_matrix(idx, data.X)
    try:
        U, s, Vh = np.linalg.svd(B, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"SVD of the canonical system did not converge: {e}") from e

    condition = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    if N == T and s[-1] <= SINGULAR_RCOND * s[0]:
        raise NumericalError(
            f"Square canonical system is numerically singular (condition number {condition:.3e})",
            condition_number=condition,
        )

    s_inv = np.zeros_like(s)
    keep = s > SINGULAR_RCOND * s[0]
    s_inv[keep] = 1.0 / s[keep]
    theta = Vh.conj().T @ (s_inv * (U.conj().T @ data.y))

    coeffs = CanonicalCoeffs(idx, theta).hermitianized()
    final_loss = canonical_loss(coeffs, data)
    ill_conditioned = condition > CONDITION_FLAG_THRESHOLD
    if ill_conditioned:
        logger.warning(f"Canonical system is ill-conditioned (condition number {condition:.3e})")
    logger.debug(f"Min-norm solve T={T}, N={N}: loss {final_loss:.3e}, cond {condition:.3e}")
    return CanonicalFitResult(
        coeffs, final_loss, 0, "min_norm_direct", condition, ill_conditioned
    )


def max_stable_lr(data: TrainingSet, idx: FrequencyIndexSet) -> float:
    """1/L for L = 2 sigma_max(B)^2, the Lipschitz constant of grad Q."""
    _check_data(data, idx)
    sigma_max = float(np.linalg.norm(basis_matrix(idx, data.X), 2))
    return 1.0 / (2.0 * sigma_max ** 2)


def convex_gd(
    data: TrainingSet,
    idx: FrequencyIndexSet,
    steps: int,
    lr: float,
    init: Optional[CanonicalCoeffs] = None,
) -> CanonicalFitResult:
    """
    Full-batch gradient descent on Q(theta) in the real-stacked parametrization
    theta = a + i b, projected onto Hermitian symmetry after every step.

    lr must be below 1/L with L = 2 sigma_max(B)^2 for the T x N system B, which
    makes the loss sequence non-increasing.

    Raises:
        PreconditionError: If lr is not in (0, 1/L), steps < 0 or data is empty
        NumericalError: If the loss increases beyond rounding
    """
    _check_data(data, idx)
    if steps < 0:
        raise PreconditionError(f"steps must be non-negative, got {steps}")
    if not lr > 0:
        raise PreconditionError(f"lr must be positive, got {lr}")

    B = basis_matrix(idx, data.X)
    limit = max_stable_lr(data, idx)
    if lr >= limit:
        raise PreconditionError(f"lr = {lr} must be below 1/L = {limit:.6g}")

    N = len(idx)
    A = np.hstack([B.real, -B.imag])
    neg = idx.negation_permutation()
    start = (init if init is not None else CanonicalCoeffs.zeros(idx)).hermitianized()
    if start.index_set != idx:
        raise PreconditionError(f"Initial coefficients use {start.index_set}, expected {idx}")
    p = np.concatenate([start.values.real, start.values.imag])

    def project(p: np.ndarray) -> np.ndarray:
        a, b = p[:N], p[N:]
        return np.concatenate([0.5 * (a + a[neg]), 0.5 * (b - b[neg])])

    y = data.y
    slack = 64 * np.finfo(np.float64).eps * (1.0 + float(np.dot(y, y)))
    r = A @ p - y
    loss = float(np.dot(r, r))
    history = [loss]
    for step in range(steps):
        p = project(p - lr * 2.0 * (A.T @ r))
        r = A @ p - y
        new_loss = float(np.dot(r, r))
        if new_loss > loss + slack:
            raise NumericalError(f"Loss increased at step {step}: {loss:.6e} -> {new_loss:.6e}")
        loss = new_loss
        history.append(loss)

    coeffs = CanonicalCoeffs(idx, p[:N] + 1j * p[N:])
    logger.debug(f"Convex GD {steps} steps, lr={lr}: loss {history[0]:.3e} -> {loss:.3e}")
    return CanonicalFitResult(
        coeffs, loss, steps, "gradient_descent", loss_history=history
    )


def convexity_probe(
    f1_coeffs: CanonicalCoeffs,
    f2_coeffs: CanonicalCoeffs,
    data: TrainingSet,
    lambdas: Iterable[float],
    slack: float = CONVEXITY_SLACK,
) -> bool:
    """
    Check Q(l theta1 + (1 - l) theta2) <= l Q(theta1) + (1 - l) Q(theta2) + slack
    for every l in ``lambdas``.

    Raises:
        PreconditionError: On index-set mismatch or lambdas outside [0, 1]
    """
    if f1_coeffs.index_set != f2_coeffs.index_set:
        raise PreconditionError(
            f"Index set mismatch: {f1_coeffs.index_set} vs {f2_coeffs.index_set}"
        )
    q1 = canonical_loss(f1_coeffs, data)
    q2 = canonical_loss(f2_coeffs, data)
    holds = True
    for lam in lambdas:
        lam = float(lam)
        if not 0.0 <= lam <= 1.0:
            raise PreconditionError(f"lambda must lie in [0, 1], got {lam}")
        mixed = canonical_loss(lam * f1_coeffs + (1.0 - lam) * f2_coeffs, data)
        if mixed > lam * q1 + (1.0 - lam) * q2 + slack:
            logger.warning(f"Convexity violated at lambda={lam}: {mixed} > {lam * q1 + (1.0 - lam) * q2}")
            holds = False
    return holds
