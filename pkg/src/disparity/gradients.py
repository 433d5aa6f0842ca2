"""Canonical-space gradients and the chain-rule identity grad_w Q = H(w) grad_theta Q."""

from typing import NamedTuple

import numpy as np

from src.disparity.matrix import DisparityMatrix
from src.exceptions import PreconditionError
from src.fourier.coefficients import CanonicalCoeffs
from src.fourier.grids import FrequencyIndexSet
from src.fourier.projection import basis_matrix, project_network
from src.nn_core.dataset import TrainingSet
from src.nn_core.loss import check_loss, loss_and_grad, mse_derivative
from src.nn_core.network import MlpNetwork, forward_batch

_NORM_FLOOR = 1e-15


class ChainRuleResidual(NamedTuple):
    rel_residual: float
    imag_residue: float


def _gradient_from_predictions(
    idx: FrequencyIndexSet, data: TrainingSet, predictions: np.ndarray
) -> np.ndarray:
    # Linear (non-conjugated) convention: g_k = sum_t l'(y_t, y_hat_t) eta_k(x_t).
    B = basis_matrix(idx, data.X)
    return B.T @ mse_derivative(predictions, data.y)


def canonical_gradient(coeffs: CanonicalCoeffs, data: TrainingSet, loss: str = "mse") -> np.ndarray:
    """
    Gradient of Q(theta) with each theta_k an independent coordinate, predictions
    taken from the partial sum.

    Returns:
        Complex vector of length N
    """
    check_loss(loss)
    if len(data) == 0:
        raise PreconditionError("Cannot compute a canonical gradient on an empty training set")
    B = basis_matrix(coeffs.index_set, data.X)
    predictions = (B @ coeffs.values).real
    return B.T @ mse_derivative(predictions, data.y)


def canonical_gradient_at_network(
    net: MlpNetwork, data: TrainingSet, idx: FrequencyIndexSet, loss: str = "mse"
) -> np.ndarray:
    """
    Canonical gradient at theta = F(f_w) restricted to the index set.

    Residuals come from f_w itself, so the value does not depend on truncation of
    the function, only on which frequencies are kept.
    """
    check_loss(loss)
    if len(data) == 0:
        raise PreconditionError("Cannot compute a canonical gradient on an empty training set")
    return _gradient_from_predictions(idx, data, forward_batch(net, data.X))


def chain_rule_residual(
    net: MlpNetwork, data: TrainingSet, H: DisparityMatrix, loss: str = "mse"
) -> ChainRuleResidual:
    """
    Relative residual of grad_w Q - Re(H grad_theta Q) and the relative imaginary residue.

    The literal gradient is restricted to the weights that have rows in H.
    """
    if H.architecture != net.architecture:
        raise PreconditionError("Disparity matrix was built for a different architecture")
    _, g_lit = loss_and_grad(net, data, loss)
    g_lit = g_lit[H.weight_indices]
    theta = project_network(net, H.index_set, H.grid)
    g_can = canonical_gradient(theta, data, loss)
    mapped = H.matrix @ g_can
    scale = max(float(np.linalg.norm(g_lit)), _NORM_FLOOR)
    return ChainRuleResidual(
        float(np.linalg.norm(g_lit - mapped.real)) / scale,
        float(np.linalg.norm(mapped.imag)) / scale,
    )
