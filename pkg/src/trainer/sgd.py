"""Minibatch SGD w <- w - h_k grad_w Q(w) with a sampled rank monitor."""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.config.models import ExperimentConfig
from src.constants import DEFAULT_MONITOR_CADENCE, RANK_REL_TOL, SEED_COMPONENT_SHUFFLE
from src.disparity.gradients import canonical_gradient_at_network, chain_rule_residual
from src.disparity.matrix import build_disparity
from src.disparity.rank import numerical_rank
from src.exceptions import DivergenceError, NumericalError, PreconditionError
from src.fourier.grids import FrequencyIndexSet, QuadratureGrid
from src.nn_core.dataset import TrainingSet
from src.nn_core.degeneracy import (
    detect_dead_neurons,
    detect_duplicated_neurons,
    uniform_probe_grid,
)
from src.nn_core.loss import check_loss, loss_and_grad
from src.nn_core.network import MlpNetwork
from src.trainer.trace import TraceRow, TrainingTrace
from src.utils.logger import get_logger
from src.utils.seeding import split_rng

logger = get_logger(__name__)

DUPLICATE_TOL = 1e-10


@dataclass(frozen=True)
class TrainSchedule:
    """Step sizes h_k = lr0 / (1 + decay * k). lr0 = 0 gives null updates."""

    epochs: int
    minibatch_size: int
    lr0: float
    decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise PreconditionError(f"epochs must be >= 1, got {self.epochs}")
        if self.minibatch_size < 1:
            raise PreconditionError(f"minibatch_size must be >= 1, got {self.minibatch_size}")
        if not (self.lr0 >= 0 and math.isfinite(self.lr0)):
            raise PreconditionError(f"lr0 must be non-negative and finite, got {self.lr0}")
        if not (self.decay >= 0 and math.isfinite(self.decay)):
            raise PreconditionError(f"decay must be non-negative, got {self.decay}")

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "TrainSchedule":
        train = config.train
        return cls(train.epochs, train.minibatch, train.lr0, train.decay, config.seed)

    def step_size(self, k: int) -> float:
        return self.lr0 / (1.0 + self.decay * k)


@dataclass(frozen=True)
class MonitorSpec:
    """
    Every ``cadence`` steps the full loss is recorded. With an index set the step
    also gets H(w), its rank report, the canonical gradient norm and the
    chain-rule residual.
    """

    cadence: int = DEFAULT_MONITOR_CADENCE
    index_set: Optional[FrequencyIndexSet] = None
    grid: Optional[QuadratureGrid] = None
    rank_tol: float = RANK_REL_TOL
    track_degeneracy: bool = False
    probe_points_per_dim: int = 33
    _probe: Optional[np.ndarray] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.cadence < 1:
            raise PreconditionError(f"cadence must be >= 1, got {self.cadence}")
        if self.index_set is not None and self.grid is None:
            object.__setattr__(self, "grid", QuadratureGrid.for_index_set(self.index_set))
        if self.grid is not None and self.index_set is None:
            raise PreconditionError("A monitor grid needs an index set")

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "MonitorSpec":
        return cls(
            cadence=config.monitor.cadence,
            index_set=FrequencyIndexSet(config.canonical.per_dim_limits),
            grid=QuadratureGrid(config.canonical.grid_points_per_dim),
            rank_tol=config.monitor.rank_rel_tol,
            track_degeneracy=config.monitor.track_degeneracy,
        )

    @property
    def rank_enabled(self) -> bool:
        return self.index_set is not None

    def probe_grid(self, input_dim: int) -> np.ndarray:
        if self._probe is None or self._probe.shape[1] != input_dim:
            object.__setattr__(
                self, "_probe", uniform_probe_grid(input_dim, self.probe_points_per_dim)
            )
        return self._probe


def _fill_monitored(
    row: TraceRow, net: MlpNetwork, data: TrainingSet, loss: str, monitor: MonitorSpec
) -> None:
    full_loss, full_grad = loss_and_grad(net, data, loss)
    row.full_loss = full_loss
    row.full_grad_norm = float(np.linalg.norm(full_grad))
    if monitor.rank_enabled:
        H = build_disparity(net, monitor.index_set, monitor.grid)
        report = numerical_rank(H, monitor.rank_tol)
        g_can = canonical_gradient_at_network(net, data, monitor.index_set, loss)
        row.rank = report.numerical_rank
        row.sigma_ratio = report.sigma_min_over_sigma_max
        row.grad_norm_canonical = float(np.linalg.norm(g_can))
        row.chain_residual = chain_rule_residual(net, data, H, loss).rel_residual
        row.disparity_norm = H.frobenius_norm()
    if monitor.track_degeneracy:
        row.dead_neurons = len(detect_dead_neurons(net, monitor.probe_grid(net.input_dim)))
        row.duplicated_pairs = len(detect_duplicated_neurons(net, DUPLICATE_TOL))
    if row.rank is not None:
        logger.info(
            f"step {row.step}: Q={full_loss:.3e} rank={row.rank}/{len(monitor.index_set)} "
            f"|grad_theta|={row.grad_norm_canonical:.3e}"
        )
    else:
        logger.info(f"step {row.step}: Q={full_loss:.3e} |grad_w|={row.full_grad_norm:.3e}")


def _diverged(step: int, trace: TrainingTrace, detail: str) -> DivergenceError:
    logger.error(f"SGD diverged at step {step}: {detail}")
    return DivergenceError(f"SGD diverged at step {step}: {detail}", trace=trace)


def sgd_train(
    net: MlpNetwork,
    data: TrainingSet,
    loss: str,
    schedule: TrainSchedule,
    monitor: Optional[MonitorSpec] = None,
) -> Tuple[MlpNetwork, TrainingTrace]:
    """
    Train with seeded per-epoch shuffling; the minibatch loss is a sum over its samples.

    Every update row holds the minibatch loss and the norm of the minibatch gradient.
    Rows at steps divisible by the cadence, and a closing row after the last update,
    are monitored and also carry the full-batch loss and gradient norm.

    Args:
        net: Initial network w^(0)
        data: Training set
        loss: Loss name
        schedule: Epochs, minibatch size, step sizes and shuffle seed
        monitor: Monitor spec; full loss only at the default cadence when omitted

    Returns:
        (final network, trace)

    Raises:
        PreconditionError: On bad schedule/data combinations or N < T under rank monitoring
        DivergenceError: On a non-finite loss, gradient or weight
    """
    check_loss(loss)
    monitor = monitor or MonitorSpec()
    T = len(data)
    if T == 0:
        raise PreconditionError("Cannot train on an empty training set")
    if net.input_dim != data.input_dim:
        raise PreconditionError(
            f"Network input dimension {net.input_dim} does not match data dimension {data.input_dim}"
        )
    if schedule.minibatch_size > T:
        raise PreconditionError(f"minibatch_size {schedule.minibatch_size} exceeds T = {T}")
    if monitor.rank_enabled and len(monitor.index_set) < T:
        raise PreconditionError(f"Monitor index set has N = {len(monitor.index_set)} < T = {T}")

    rng = split_rng(schedule.seed, SEED_COMPONENT_SHUFFLE)
    trace = TrainingTrace()
    current = net
    step = 0
    logger.debug(
        f"SGD on {net!r}: T={T}, epochs={schedule.epochs}, "
        f"minibatch={schedule.minibatch_size}, lr0={schedule.lr0}"
    )
    for epoch in range(schedule.epochs):
        order = rng.permutation(T)
        for start in range(0, T, schedule.minibatch_size):
            batch = data.subset(order[start:start + schedule.minibatch_size])
            batch_loss, grad = loss_and_grad(current, batch, loss)
            if not (math.isfinite(batch_loss) and np.all(np.isfinite(grad))):
                raise _diverged(step, trace, f"minibatch loss {batch_loss}")

            row = TraceRow(step, epoch, batch_loss, float(np.linalg.norm(grad)))
            if step % monitor.cadence == 0:
                _fill_monitored(row, current, data, loss, monitor)
                if not math.isfinite(row.full_loss):
                    raise _diverged(step, trace, f"full loss {row.full_loss}")
            trace.append(row)

            try:
                current = current.with_weights(current.weights - schedule.step_size(step) * grad)
            except NumericalError as e:
                raise _diverged(step, trace, str(e)) from e
            step += 1

    full_loss, _ = loss_and_grad(current, data, loss)
    if not math.isfinite(full_loss):
        raise _diverged(step, trace, f"full loss {full_loss}")
    final = TraceRow(step, schedule.epochs, None, None)
    _fill_monitored(final, current, data, loss, monitor)
    trace.append(final)
    logger.debug(f"SGD finished after {step} steps with Q={final.full_loss:.3e}")
    return current, trace
