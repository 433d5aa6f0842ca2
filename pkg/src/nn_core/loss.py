"""Training loss Q(w) = sum_t l(y_t, f_w(x_t)) and its weight gradient."""

from typing import Tuple

import numpy as np

from src.exceptions import PreconditionError
from src.nn_core.dataset import TrainingSet
from src.nn_core.network import MlpNetwork, forward_batch, jacobian_batch

SUPPORTED_LOSSES = ("mse",)


def check_loss(loss: str) -> None:
    if loss not in SUPPORTED_LOSSES:
        raise PreconditionError(f"Unsupported loss '{loss}', expected one of {SUPPORTED_LOSSES}")


def mse_value(predictions: np.ndarray, targets: np.ndarray) -> float:
    r = predictions - targets
    return float(np.dot(r, r))


def mse_derivative(predictions: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """dl/dy_hat for l(y, y_hat) = (y - y_hat)^2."""
    return 2.0 * (predictions - targets)


def loss_value(net: MlpNetwork, data: TrainingSet, loss: str = "mse") -> float:
    check_loss(loss)
    if len(data) == 0:
        raise PreconditionError("Cannot evaluate the loss on an empty training set")
    return mse_value(forward_batch(net, data.X), data.y)


def loss_and_grad(net: MlpNetwork, data: TrainingSet, loss: str = "mse") -> Tuple[float, np.ndarray]:
    """
    Loss and its exact gradient with respect to the flat weights.

    Args:
        net: Network
        data: Non-empty training set
        loss: Loss name (only "mse")

    Returns:
        (Q, grad) with grad of length M
    """
    check_loss(loss)
    if len(data) == 0:
        raise PreconditionError("Cannot evaluate the loss on an empty training set")
    predictions, J = jacobian_batch(net, data.X)
    Q = mse_value(predictions, data.y)
    grad = mse_derivative(predictions, data.y) @ J
    return Q, grad
