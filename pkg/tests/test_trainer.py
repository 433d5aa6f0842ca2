"""Tests for initialization, degeneracy injection and monitored SGD."""

import math

import numpy as np
import pandas as pd
import pytest

from src.constants import TRACE_COLUMNS
from src.exceptions import DivergenceError, PreconditionError
from src.fourier.grids import FrequencyIndexSet
from src.nn_core.dataset import TrainingSet
from src.nn_core.degeneracy import detect_dead_neurons, detect_duplicated_neurons, uniform_probe_grid
from src.nn_core.loss import loss_and_grad
from src.nn_core.network import Architecture, MlpNetwork, NeuronId, forward_batch
from src.trainer.degenerate import DuplicateNeuron, KillNeurons, kill_all, make_degenerate
from src.trainer.init import InitScheme, init_random
from src.trainer.sgd import MonitorSpec, TrainSchedule, sgd_train
from src.trainer.trace import TraceRow, TrainingTrace


def test_init_is_deterministic_per_seed():
    arch = Architecture(2, (6, 3), "tanh")
    scheme = InitScheme("center_cutting")
    assert init_random(arch, scheme, 17) == init_random(arch, scheme, 17)
    assert init_random(arch, scheme, 17) != init_random(arch, scheme, 18)


def test_uniform_fan_in_bounds():
    arch = Architecture(3, (10,), "relu")
    net = init_random(arch, InitScheme("uniform_fan_in", scale=0.5), 1)
    (W1, b1), (W2, b2) = net.layer_params()
    assert np.all(np.abs(W1) <= 0.5 * math.sqrt(3 / 3))
    assert np.all(np.abs(W2) <= 0.5 * math.sqrt(3 / 10))
    assert not b1.any() and not b2.any()


def test_center_cutting_hyperplanes_pass_near_center():
    arch = Architecture(2, (12,), "tanh")
    net = init_random(arch, InitScheme("center_cutting", center_offset=0.1), 8)
    W, b = net.layer_params()[0]
    pre = W @ np.array([0.5, 0.5]) + b
    assert np.all(np.abs(pre) <= 0.1 + 1e-15)


def test_init_scheme_validation():
    with pytest.raises(PreconditionError):
        InitScheme("xavier")
    with pytest.raises(PreconditionError):
        InitScheme(scale=0.0)


def test_zero_learning_rate_is_a_null_update(tanh_net, small_data):
    schedule = TrainSchedule(epochs=5, minibatch_size=2, lr0=0.0, seed=3)
    final, trace = sgd_train(tanh_net, small_data, "mse", schedule, MonitorSpec(cadence=3))
    assert final == tanh_net
    losses = {row.full_loss for row in trace.monitored_rows()}
    assert len(losses) == 1


def test_training_reduces_loss(tanh_net, small_data):
    schedule = TrainSchedule(epochs=200, minibatch_size=4, lr0=0.01, seed=1)
    _, trace = sgd_train(tanh_net, small_data, "mse", schedule, MonitorSpec(cadence=50))
    monitored = trace.monitored_rows()
    assert monitored[-1].full_loss < monitored[0].full_loss
    assert [row.step for row in trace] == list(range(201))


def test_training_is_deterministic(tanh_net, small_data):
    schedule = TrainSchedule(epochs=10, minibatch_size=2, lr0=0.02, decay=0.01, seed=9)
    monitor = MonitorSpec(cadence=4, index_set=FrequencyIndexSet([2]))
    net_a, trace_a = sgd_train(tanh_net, small_data, "mse", schedule, monitor)
    net_b, trace_b = sgd_train(tanh_net, small_data, "mse", schedule, monitor)
    assert net_a == net_b
    pd.testing.assert_frame_equal(trace_a.to_frame(), trace_b.to_frame())


def test_rank_monitor_fills_rows(tanh_net, small_data):
    schedule = TrainSchedule(epochs=6, minibatch_size=4, lr0=0.01, seed=0)
    monitor = MonitorSpec(cadence=2, index_set=FrequencyIndexSet([2]), track_degeneracy=True)
    _, trace = sgd_train(tanh_net, small_data, "mse", schedule, monitor)
    ranked = trace.ranked_rows()
    assert [row.step for row in ranked] == [0, 2, 4, 6]
    for row in ranked:
        assert 0 < row.rank <= 5
        assert row.grad_norm_canonical is not None and row.chain_residual is not None
        assert row.dead_neurons is not None and row.disparity_norm > 0
    assert trace.rows[1].full_loss is None


def test_gradient_norm_columns_keep_their_meaning(tanh_net, small_data):
    schedule = TrainSchedule(epochs=3, minibatch_size=2, lr0=0.01, seed=4)
    final, trace = sgd_train(tanh_net, small_data, "mse", schedule, MonitorSpec(cadence=2))
    assert all(row.grad_norm_literal is not None for row in trace.rows[:-1])
    assert all(row.full_grad_norm is not None for row in trace.monitored_rows())
    closing = trace.rows[-1]
    assert closing.minibatch_loss is None and closing.grad_norm_literal is None
    _, grad = loss_and_grad(final, small_data)
    assert closing.full_grad_norm == pytest.approx(np.linalg.norm(grad))
    assert "full_grad_norm" in trace.to_frame(extended=True).columns
    assert "full_grad_norm" not in trace.to_frame().columns

    full_batch = TrainSchedule(epochs=1, minibatch_size=4, lr0=0.01, seed=4)
    _, trace = sgd_train(tanh_net, small_data, "mse", full_batch, MonitorSpec(cadence=1))
    first = trace.rows[0]
    assert first.grad_norm_literal == pytest.approx(first.full_grad_norm, rel=1e-12)


def test_rank_monitor_requires_enough_frequencies(tanh_net):
    data = TrainingSet([[0.1], [0.3], [0.5], [0.7]], [0.0, 1.0, 0.0, 1.0])
    schedule = TrainSchedule(epochs=1, minibatch_size=4, lr0=0.01)
    with pytest.raises(PreconditionError):
        sgd_train(tanh_net, data, "mse", schedule, MonitorSpec(index_set=FrequencyIndexSet([1])))


def test_schedule_validation_and_step_sizes():
    schedule = TrainSchedule(epochs=1, minibatch_size=1, lr0=0.1, decay=0.5)
    assert schedule.step_size(0) == 0.1
    assert schedule.step_size(10) == pytest.approx(0.1 / 6.0)
    with pytest.raises(PreconditionError):
        TrainSchedule(epochs=0, minibatch_size=1, lr0=0.1)
    with pytest.raises(PreconditionError):
        TrainSchedule(epochs=1, minibatch_size=1, lr0=-0.1)


def test_minibatch_larger_than_data_rejected(tanh_net, small_data):
    with pytest.raises(PreconditionError):
        sgd_train(tanh_net, small_data, "mse", TrainSchedule(epochs=1, minibatch_size=5, lr0=0.1))


def test_divergence_aborts_with_partial_trace(small_data):
    net = MlpNetwork(Architecture(1, (), "tanh"), [0.5, 0.5])
    schedule = TrainSchedule(epochs=2000, minibatch_size=4, lr0=1e3)
    with pytest.raises(DivergenceError) as excinfo:
        sgd_train(net, small_data, "mse", schedule)
    trace = excinfo.value.trace
    assert isinstance(trace, TrainingTrace)
    assert 0 < len(trace) < 2000


def test_kill_then_detect():
    arch = Architecture(2, (6, 4), "relu")
    net = init_random(arch, InitScheme(), 21)
    killed = make_degenerate(net, KillNeurons([(0, 1), (1, 2)]))
    dead = detect_dead_neurons(killed, uniform_probe_grid(2))
    assert NeuronId(0, 1) in dead and NeuronId(1, 2) in dead
    X = uniform_probe_grid(2, 9)
    W, b = killed.layer_params()[0]
    assert np.all(X @ W[1] + b[1] <= -1.0)


def test_kill_rejected_for_smooth_activations(tanh_net):
    with pytest.raises(PreconditionError):
        make_degenerate(tanh_net, KillNeurons([(0, 0)]))


def test_degeneracy_targets_must_exist():
    net = init_random(Architecture(1, (3,), "relu"), InitScheme(), 0)
    with pytest.raises(PreconditionError):
        make_degenerate(net, KillNeurons([(0, 3)]))
    with pytest.raises(PreconditionError):
        make_degenerate(net, DuplicateNeuron((0, 0), (1, 0)))
    with pytest.raises(PreconditionError):
        make_degenerate(net, DuplicateNeuron((0, 1), (0, 1)))


def test_dead_neurons_never_move(small_data):
    arch = Architecture(1, (5,), "relu")
    net = make_degenerate(init_random(arch, InitScheme(), 2), KillNeurons([(0, 0), (0, 3)]))
    final, _ = sgd_train(net, small_data, "mse", TrainSchedule(epochs=50, minibatch_size=2, lr0=0.01))
    for neuron in (NeuronId(0, 0), NeuronId(0, 3)):
        incoming = arch.incoming_indices(neuron)
        np.testing.assert_array_equal(final.weights[incoming], net.weights[incoming])
        _, grad = loss_and_grad(final, small_data)
        assert not grad[incoming].any()


def test_all_dead_run_stays_rank_deficient(small_data):
    arch = Architecture(1, (6,), "relu")
    base = init_random(arch, InitScheme(), 5)
    net = make_degenerate(base, kill_all(base))
    assert np.ptp(forward_batch(net, uniform_probe_grid(1))) == 0.0
    monitor = MonitorSpec(cadence=10, index_set=FrequencyIndexSet([2]))
    _, trace = sgd_train(net, small_data, "mse", TrainSchedule(epochs=40, minibatch_size=4, lr0=0.02), monitor)
    assert all(row.rank == 1 for row in trace.ranked_rows())


def test_duplicates_stay_duplicated_under_full_batch_descent(tanh_net, small_data):
    net = make_degenerate(tanh_net, DuplicateNeuron((0, 1), (0, 4)))
    assert (NeuronId(0, 1), NeuronId(0, 4)) in detect_duplicated_neurons(net, 1e-12)
    final, _ = sgd_train(net, small_data, "mse", TrainSchedule(epochs=100, minibatch_size=4, lr0=0.01))
    arch = final.architecture
    for pick in (arch.incoming_indices, arch.outgoing_indices):
        np.testing.assert_allclose(
            final.weights[pick(NeuronId(0, 1))], final.weights[pick(NeuronId(0, 4))], atol=1e-10
        )


def test_trace_csv_layout(tmp_path, tanh_net, small_data):
    _, trace = sgd_train(
        tanh_net, small_data, "mse", TrainSchedule(epochs=3, minibatch_size=2, lr0=0.01), MonitorSpec(cadence=5)
    )
    path = trace.to_csv(tmp_path / "trace.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    second = lines[2].split(",")
    assert second[0] == "1" and second[TRACE_COLUMNS.index("full_loss")] == ""
    assert second[TRACE_COLUMNS.index("rank")] == ""


def test_trace_steps_must_increase():
    trace = TrainingTrace([TraceRow(0, 0, 1.0, 1.0)])
    with pytest.raises(PreconditionError):
        trace.append(TraceRow(0, 0, 1.0, 1.0))


def test_degeneracy_summary_counts_new_units():
    trace = TrainingTrace(
        [
            TraceRow(0, 0, 1.0, 1.0, full_loss=1.0, dead_neurons=1, duplicated_pairs=0),
            TraceRow(5, 1, 1.0, 1.0, full_loss=0.5, dead_neurons=3, duplicated_pairs=0),
        ]
    )
    summary = trace.degeneracy_summary()
    assert summary["new_dead"] == 2
    assert summary["new_duplicated"] == 0
