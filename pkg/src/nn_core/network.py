"""Dense feed-forward networks on the unit cube with exact reverse-mode weight derivatives.

Flat weight ordering (stable, layer-major): for each layer, the incoming weight
matrix W (fan_out x fan_in) row-major, then the bias vector b (fan_out). The
output layer is linear with a single unit.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Tuple

import numpy as np

from src.constants import ACTIVATIONS
from src.exceptions import NumericalError, PreconditionError


class NeuronId(NamedTuple):
    """A hidden unit: ``layer_index`` counts hidden layers from 0."""
    layer_index: int
    unit_index: int


@dataclass(frozen=True)
class Architecture:
    """Input dimension K, hidden widths and the hidden activation."""

    input_dim: int
    hidden_sizes: Tuple[int, ...] = ()
    activation: str = "tanh"

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.input_dim < 1:
            raise PreconditionError(f"input_dim must be positive, got {self.input_dim}")
        if any(h < 1 for h in self.hidden_sizes):
            raise PreconditionError(f"hidden_sizes must be positive, got {self.hidden_sizes}")
        if self.activation not in ACTIVATIONS:
            raise PreconditionError(
                f"Unknown activation '{self.activation}', expected one of {ACTIVATIONS}"
            )

    @property
    def layer_sizes(self) -> Tuple[int, ...]:
        return (self.input_dim, *self.hidden_sizes, 1)

    @property
    def layers(self) -> List[Tuple[int, int]]:
        """(fan_in, fan_out) of every weight layer, output layer last."""
        sizes = self.layer_sizes
        return [(sizes[i], sizes[i + 1]) for i in range(len(sizes) - 1)]

    @property
    def num_weights(self) -> int:
        return sum((fan_in + 1) * fan_out for fan_in, fan_out in self.layers)

    @property
    def num_hidden_layers(self) -> int:
        return len(self.hidden_sizes)

    def layer_offsets(self) -> List[Tuple[slice, slice]]:
        """Flat slices (weights, biases) of every layer."""
        offsets = []
        start = 0
        for fan_in, fan_out in self.layers:
            w_end = start + fan_in * fan_out
            b_end = w_end + fan_out
            offsets.append((slice(start, w_end), slice(w_end, b_end)))
            start = b_end
        return offsets

    def flat_index(self, layer: int, row: int, col: int) -> int:
        """Flat index of W_layer[row, col]; ``col == fan_in`` addresses the bias."""
        fan_in, fan_out = self.layers[layer]
        if not (0 <= row < fan_out and 0 <= col <= fan_in):
            raise PreconditionError(f"({layer}, {row}, {col}) outside layer shape")
        w_slice, b_slice = self.layer_offsets()[layer]
        if col == fan_in:
            return b_slice.start + row
        return w_slice.start + row * fan_in + col

    def coordinates(self, index: int) -> Tuple[int, int, int]:
        """Inverse of ``flat_index``."""
        if not 0 <= index < self.num_weights:
            raise PreconditionError(f"Weight index {index} outside [0, {self.num_weights})")
        for layer, (w_slice, b_slice) in enumerate(self.layer_offsets()):
            fan_in, _ = self.layers[layer]
            if w_slice.start <= index < w_slice.stop:
                row, col = divmod(index - w_slice.start, fan_in)
                return layer, row, col
            if b_slice.start <= index < b_slice.stop:
                return layer, index - b_slice.start, fan_in
        raise AssertionError("unreachable")

    def check_neuron(self, neuron: NeuronId) -> None:
        layer, unit = neuron
        if not 0 <= layer < self.num_hidden_layers:
            raise PreconditionError(f"Hidden layer {layer} does not exist in {self.hidden_sizes}")
        if not 0 <= unit < self.hidden_sizes[layer]:
            raise PreconditionError(
                f"Unit {unit} does not exist in hidden layer {layer} of width "
                f"{self.hidden_sizes[layer]}"
            )

    def incoming_indices(self, neuron: NeuronId) -> np.ndarray:
        """Flat indices of the neuron's incoming weights followed by its bias."""
        self.check_neuron(neuron)
        layer, unit = neuron
        fan_in, _ = self.layers[layer]
        return np.array([self.flat_index(layer, unit, col) for col in range(fan_in + 1)])

    def outgoing_indices(self, neuron: NeuronId) -> np.ndarray:
        """Flat indices of the weights leaving the neuron."""
        self.check_neuron(neuron)
        layer, unit = neuron
        _, fan_out = self.layers[layer + 1]
        return np.array([self.flat_index(layer + 1, row, unit) for row in range(fan_out)])

    def hidden_neurons(self) -> List[NeuronId]:
        return [
            NeuronId(layer, unit)
            for layer, width in enumerate(self.hidden_sizes)
            for unit in range(width)
        ]


class MlpNetwork:
    """An architecture plus its flat weight vector (the literal-space point w)."""

    __slots__ = ("architecture", "weights")

    def __init__(self, architecture: Architecture, weights: Iterable[float]):
        w = np.array(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != architecture.num_weights:
            raise PreconditionError(
                f"Expected {architecture.num_weights} weights for {architecture}, got {w.shape[0]}"
            )
        if not np.all(np.isfinite(w)):
            raise NumericalError("Network weights contain NaN or Inf")
        w.setflags(write=False)
        object.__setattr__(self, "architecture", architecture)
        object.__setattr__(self, "weights", w)

    def __setattr__(self, name, value):
        raise AttributeError("MlpNetwork is immutable; use with_weights()")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MlpNetwork):
            return NotImplemented
        return self.architecture == other.architecture and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self):
        return hash((self.architecture, self.weights.tobytes()))

    def __repr__(self) -> str:
        arch = self.architecture
        widths = "-".join(str(s) for s in arch.layer_sizes)
        return f"MlpNetwork({widths} {arch.activation}, M={self.num_weights})"

    @classmethod
    def zeros(cls, architecture: Architecture) -> "MlpNetwork":
        return cls(architecture, np.zeros(architecture.num_weights))

    @classmethod
    def from_layers(
        cls, architecture: Architecture, params: List[Tuple[np.ndarray, np.ndarray]]
    ) -> "MlpNetwork":
        """Build from per-layer (W, b) pairs in architecture order."""
        if len(params) != len(architecture.layers):
            raise PreconditionError(
                f"Expected {len(architecture.layers)} layers, got {len(params)}"
            )
        flat = []
        for (fan_in, fan_out), (W, b) in zip(architecture.layers, params):
            W = np.asarray(W, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64).reshape(-1)
            if W.shape != (fan_out, fan_in) or b.shape != (fan_out,):
                raise PreconditionError(
                    f"Layer shapes {W.shape}, {b.shape} do not match ({fan_out}, {fan_in})"
                )
            flat.extend([W.reshape(-1), b])
        return cls(architecture, np.concatenate(flat))

    @property
    def input_dim(self) -> int:
        return self.architecture.input_dim

    @property
    def hidden_sizes(self) -> Tuple[int, ...]:
        return self.architecture.hidden_sizes

    @property
    def activation(self) -> str:
        return self.architecture.activation

    @property
    def num_weights(self) -> int:
        return self.architecture.num_weights

    def layer_params(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Read-only (W, b) views of every layer."""
        params = []
        for (fan_in, fan_out), (w_slice, b_slice) in zip(
            self.architecture.layers, self.architecture.layer_offsets()
        ):
            params.append((self.weights[w_slice].reshape(fan_out, fan_in), self.weights[b_slice]))
        return params

    def with_weights(self, weights: Iterable[float]) -> "MlpNetwork":
        return MlpNetwork(self.architecture, weights)


def activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    if name == "cosine":
        return np.cos(2.0 * math.pi * z)
    raise PreconditionError(f"Unknown activation '{name}'")


def activation_derivative(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Derivative at pre-activation ``z`` given ``a = activate(z)``. ReLU'(0) is 0."""
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "tanh":
        return 1.0 - a * a
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "cosine":
        return -2.0 * math.pi * np.sin(2.0 * math.pi * z)
    raise PreconditionError(f"Unknown activation '{name}'")


def as_points(input_dim: int, X) -> np.ndarray:
    """
    Validate evaluation inputs and return them as a (P, K) float array.

    Raises:
        PreconditionError: On dimension mismatch or points outside [0, 1]^K
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(1, -1) if X.shape[0] == input_dim else X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[1] != input_dim:
        raise PreconditionError(
            f"Input has shape {np.shape(X)} but the network expects dimension {input_dim}"
        )
    if not np.all(np.isfinite(X)):
        raise PreconditionError("Input contains NaN or Inf")
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise PreconditionError("Inputs must lie in the unit hypercube [0, 1]^K")
    return X


def _forward_pass(net: MlpNetwork, X: np.ndarray):
    """Returns (outputs, hidden pre-activations, layer inputs)."""
    params = net.layer_params()
    last = len(params) - 1
    a = X
    pre_activations = []
    layer_inputs = [X]
    for layer, (W, b) in enumerate(params):
        z = a @ W.T + b
        if layer == last:
            return z[:, 0], pre_activations, layer_inputs
        a = activate(net.activation, z)
        pre_activations.append(z)
        layer_inputs.append(a)
    raise AssertionError("unreachable")


def forward_batch(net: MlpNetwork, X) -> np.ndarray:
    """Evaluate f_w at every row of X (P x K)."""
    X = as_points(net.input_dim, X)
    out, _, _ = _forward_pass(net, X)
    return out


def forward(net: MlpNetwork, x) -> float:
    """Evaluate f_w(x) at a single point of [0, 1]^K."""
    X = as_points(net.input_dim, x)
    if X.shape[0] != 1:
        raise PreconditionError(f"forward expects a single point, got {X.shape[0]}")
    return float(forward_batch(net, X)[0])


def jacobian_batch(net: MlpNetwork, X) -> Tuple[np.ndarray, np.ndarray]:
    """
    Outputs and per-point weight gradients by reverse-mode differentiation.

    Args:
        net: Network
        X: Points (P x K) in [0, 1]^K

    Returns:
        (f_w(X) of shape (P,), Jacobian of shape (P, M))
    """
    X = as_points(net.input_dim, X)
    out, pre_activations, layer_inputs = _forward_pass(net, X)
    arch = net.architecture
    params = net.layer_params()
    offsets = arch.layer_offsets()

    P = X.shape[0]
    J = np.empty((P, arch.num_weights))
    delta = np.ones((P, 1))
    for layer in reversed(range(len(params))):
        W, _ = params[layer]
        w_slice, b_slice = offsets[layer]
        a_prev = layer_inputs[layer]
        J[:, w_slice] = (delta[:, :, None] * a_prev[:, None, :]).reshape(P, -1)
        J[:, b_slice] = delta
        if layer > 0:
            z = pre_activations[layer - 1]
            delta = (delta @ W) * activation_derivative(net.activation, z, layer_inputs[layer])
    return out, J


def grad_weights_batch(net: MlpNetwork, X) -> np.ndarray:
    """Per-point gradients of f_w with respect to every weight, shape (P, M)."""
    _, J = jacobian_batch(net, X)
    return J


def grad_weights(net: MlpNetwork, x) -> np.ndarray:
    """(df_w(x)/dw_1, ..., df_w(x)/dw_M) at a single point."""
    X = as_points(net.input_dim, x)
    if X.shape[0] != 1:
        raise PreconditionError(f"grad_weights expects a single point, got {X.shape[0]}")
    return grad_weights_batch(net, X)[0]
