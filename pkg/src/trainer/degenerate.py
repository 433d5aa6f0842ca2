"""Constructed dead and duplicated neurons."""

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from src.exceptions import PreconditionError
from src.nn_core.network import MlpNetwork, NeuronId
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, init=False)
class KillNeurons:
    neurons: Tuple[NeuronId, ...]

    def __init__(self, neurons: Iterable[Sequence[int]]):
        object.__setattr__(self, "neurons", tuple(NeuronId(int(l), int(u)) for l, u in neurons))


@dataclass(frozen=True, init=False)
class DuplicateNeuron:
    src: NeuronId
    dst: NeuronId

    def __init__(self, src: Sequence[int], dst: Sequence[int]):
        object.__setattr__(self, "src", NeuronId(int(src[0]), int(src[1])))
        object.__setattr__(self, "dst", NeuronId(int(dst[0]), int(dst[1])))


DegeneracyMode = Union[KillNeurons, DuplicateNeuron]


def kill_all(net: MlpNetwork) -> KillNeurons:
    return KillNeurons(net.architecture.hidden_neurons())


def _kill(net: MlpNetwork, neurons: Tuple[NeuronId, ...]) -> MlpNetwork:
    arch = net.architecture
    for neuron in neurons:
        arch.check_neuron(neuron)
    if arch.activation != "relu":
        raise PreconditionError(
            f"Only ReLU units can be killed exactly, network uses {arch.activation}"
        )
    targets = set(neurons)
    w = net.weights.copy()
    # Upper bounds of the current layer's inputs over [0, 1]^K; all inputs are >= 0.
    upper = np.ones(arch.input_dim)
    for layer, (w_slice, b_slice) in enumerate(arch.layer_offsets()[:-1]):
        fan_in, fan_out = arch.layers[layer]
        W = w[w_slice].reshape(fan_out, fan_in)
        b = w[b_slice]
        for unit in range(fan_out):
            if NeuronId(layer, unit) in targets:
                b[unit] = -(np.abs(W[unit]) @ upper) - 1.0
        upper = np.maximum(np.clip(W, 0.0, None) @ upper + b, 0.0)
    logger.debug(f"Killed {len(targets)} neuron(s) of {net!r}")
    return net.with_weights(w)


def _duplicate(net: MlpNetwork, src: NeuronId, dst: NeuronId) -> MlpNetwork:
    arch = net.architecture
    arch.check_neuron(src)
    arch.check_neuron(dst)
    if src.layer_index != dst.layer_index:
        raise PreconditionError(f"Cannot duplicate across layers: {src} -> {dst}")
    if src == dst:
        raise PreconditionError(f"Source and destination are the same neuron {src}")
    w = net.weights.copy()
    w[arch.incoming_indices(dst)] = w[arch.incoming_indices(src)]
    w[arch.outgoing_indices(dst)] = w[arch.outgoing_indices(src)]
    logger.debug(f"Duplicated {src} onto {dst} in {net!r}")
    return net.with_weights(w)


def make_degenerate(net: MlpNetwork, mode: DegeneracyMode) -> MlpNetwork:
    """
    Inject a dead or duplicated neuron.

    Killed ReLU units get bias -(sum_i |w_i| ub_i) - 1, where ub bounds the unit's
    inputs over [0, 1]^K (1 for the first layer), so the pre-activation stays
    <= -1 on the whole cube.

    Raises:
        PreconditionError: If a target does not exist or a kill targets a non-ReLU net
    """
    if isinstance(mode, KillNeurons):
        return _kill(net, mode.neurons)
    if isinstance(mode, DuplicateNeuron):
        return _duplicate(net, mode.src, mode.dst)
    raise PreconditionError(f"Unknown degeneracy mode {mode!r}")
