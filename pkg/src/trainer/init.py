"""Random initialization schemes."""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.config.models import InitSection
from src.constants import SEED_COMPONENT_INIT
from src.exceptions import PreconditionError
from src.nn_core.network import Architecture, MlpNetwork, activate
from src.utils.seeding import split_rng

InitKind = Literal["uniform_fan_in", "center_cutting"]


@dataclass(frozen=True)
class InitScheme:
    """
    uniform_fan_in: weights uniform in +-scale*sqrt(3/fan_in), biases 0.
    center_cutting: same weights; every hidden bias is -(w . a(c)) + u with
    a(c) the layer input at the cube center and u uniform in +-center_offset.
    """

    kind: InitKind = "uniform_fan_in"
    scale: float = 1.0
    center_offset: float = 0.1

    def __post_init__(self):
        if self.kind not in ("uniform_fan_in", "center_cutting"):
            raise PreconditionError(f"Unknown init kind '{self.kind}'")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise PreconditionError(f"scale must be positive and finite, got {self.scale}")
        if not (self.center_offset >= 0 and math.isfinite(self.center_offset)):
            raise PreconditionError(f"center_offset must be non-negative, got {self.center_offset}")

    @classmethod
    def from_section(cls, section: InitSection) -> "InitScheme":
        return cls(section.kind, section.scale, section.center_offset)


def init_random(arch: Architecture, scheme: InitScheme, seed: int) -> MlpNetwork:
    """
    Draw a network from ``scheme``. The stream is the init component of ``seed``,
    so the same seed always yields the same network.
    """
    rng = split_rng(seed, SEED_COMPONENT_INIT)
    last = len(arch.layers) - 1
    center_input = np.full(arch.input_dim, 0.5)
    params = []
    for layer, (fan_in, fan_out) in enumerate(arch.layers):
        bound = scheme.scale * math.sqrt(3.0 / fan_in)
        W = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = np.zeros(fan_out)
        if scheme.kind == "center_cutting" and layer < last:
            u = rng.uniform(-scheme.center_offset, scheme.center_offset, size=fan_out)
            b = u - W @ center_input
            center_input = activate(arch.activation, W @ center_input + b)
        params.append((W, b))
    return MlpNetwork.from_layers(arch, params)
