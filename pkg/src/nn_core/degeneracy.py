"""Dead and duplicated hidden neurons."""

import itertools
from typing import List, Tuple

import numpy as np

from src.constants import DEAD_RANGE_TOL
from src.exceptions import PreconditionError
from src.nn_core.network import MlpNetwork, NeuronId, _forward_pass, as_points


def uniform_probe_grid(input_dim: int, points_per_dim: int = 33) -> np.ndarray:
    """Uniform tensor grid over [0, 1]^K including both faces, shape (points_per_dim**K, K)."""
    if points_per_dim < 2:
        raise PreconditionError("A probe grid needs at least 2 points per dimension")
    axis = np.linspace(0.0, 1.0, points_per_dim)
    mesh = np.meshgrid(*([axis] * input_dim), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def hidden_activations(net: MlpNetwork, X) -> List[np.ndarray]:
    """Post-activation outputs of every hidden layer at the rows of X."""
    X = as_points(net.input_dim, X)
    _, _, layer_inputs = _forward_pass(net, X)
    return layer_inputs[1:]


def detect_dead_neurons(
    net: MlpNetwork, probe_grid, tol: float = DEAD_RANGE_TOL
) -> List[NeuronId]:
    """
    Hidden units whose output range over the probe grid is at most ``tol``.

    This covers ReLU units that never activate as well as saturated units of any
    activation.
    """
    probe = as_points(net.input_dim, probe_grid)
    if probe.shape[0] == 0:
        raise PreconditionError("Probe grid must be non-empty")
    dead = []
    for layer, outputs in enumerate(hidden_activations(net, probe)):
        spread = outputs.max(axis=0) - outputs.min(axis=0)
        dead.extend(NeuronId(layer, int(u)) for u in np.flatnonzero(spread <= tol))
    return dead


def detect_duplicated_neurons(net: MlpNetwork, tol: float) -> List[Tuple[NeuronId, NeuronId]]:
    """
    Same-layer pairs whose incoming rows (bias included) and outgoing columns both
    agree within ``tol`` in max-norm.
    """
    if tol <= 0:
        raise PreconditionError(f"tol must be positive, got {tol}")
    arch = net.architecture
    params = net.layer_params()
    pairs = []
    for layer, width in enumerate(arch.hidden_sizes):
        W_in, b_in = params[layer]
        W_out, _ = params[layer + 1]
        incoming = np.hstack([W_in, b_in[:, None]])
        outgoing = W_out.T
        for i, j in itertools.combinations(range(width), 2):
            if (
                np.max(np.abs(incoming[i] - incoming[j])) <= tol
                and np.max(np.abs(outgoing[i] - outgoing[j])) <= tol
            ):
                pairs.append((NeuronId(layer, i), NeuronId(layer, j)))
    return pairs
