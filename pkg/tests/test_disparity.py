"""Tests for the disparity matrix, numerical rank, chain rule and stationary points."""

import numpy as np
import pytest

from src.disparity.gradients import (
    canonical_gradient,
    canonical_gradient_at_network,
    chain_rule_residual,
)
from src.disparity.matrix import build_disparity
from src.disparity.rank import numerical_rank
from src.disparity.stationary import Verdict, classify_stationary_point, decide
from src.exceptions import PreconditionError
from src.canonical_solver.solver import canonical_loss
from src.fourier.coefficients import CanonicalCoeffs
from src.fourier.grids import FrequencyIndexSet, QuadratureGrid
from src.fourier.projection import fourier_coefficients, project_network
from src.nn_core.dataset import TrainingSet
from src.nn_core.network import Architecture, MlpNetwork, NeuronId, grad_weights_batch
from src.trainer.degenerate import DuplicateNeuron, kill_all, make_degenerate
from src.trainer.init import InitScheme, init_random


def band_limited_network(hidden=4, max_freq=3):
    """Cosine units with integer first-layer weights; f and its trainable derivatives are trigonometric polynomials."""
    arch = Architecture(1, (hidden,), "cosine")
    W1 = np.array([[1.0], [-2.0], [3.0], [2.0]])[:hidden]
    assert np.max(np.abs(W1)) <= max_freq
    params = [
        (W1, np.array([0.1, 0.37, -0.2, 0.05])[:hidden]),
        (np.array([[0.8, -0.5, 0.3, 1.1]])[:, :hidden], np.array([0.2])),
    ]
    net = MlpNetwork.from_layers(arch, params)
    # First-layer weights are frozen: rows are hidden biases plus the output layer.
    trainable = np.arange(hidden, net.num_weights)
    return net, trainable


def test_shape_and_rows_are_derivative_coefficients(tanh_net):
    idx = FrequencyIndexSet([3])
    grid = QuadratureGrid.for_index_set(idx)
    H = build_disparity(tanh_net, idx, grid)
    assert H.shape == (25, 7)
    assert H.is_complete
    for m in (0, 8, 24):
        row = fourier_coefficients(lambda X: grad_weights_batch(tanh_net, X)[:, m], idx, grid)
        np.testing.assert_allclose(H.row_for_weight(m), row.values, atol=1e-14)


def test_rows_are_hermitian(tanh_net):
    idx = FrequencyIndexSet([4])
    H = build_disparity(tanh_net, idx, QuadratureGrid.for_index_set(idx))
    neg = idx.negation_permutation()
    np.testing.assert_allclose(H.matrix[:, neg], np.conj(H.matrix), atol=1e-14)


def test_nyquist_violation_rejected(tanh_net):
    with pytest.raises(PreconditionError):
        build_disparity(tanh_net, FrequencyIndexSet([4]), QuadratureGrid([9]))


def test_weight_subset_rows(tanh_net):
    idx = FrequencyIndexSet([2])
    grid = QuadratureGrid.for_index_set(idx)
    full = build_disparity(tanh_net, idx, grid)
    part = build_disparity(tanh_net, idx, grid, weight_indices=[3, 10])
    assert part.shape == (2, 5)
    assert not part.is_complete
    np.testing.assert_array_equal(part.matrix, full.matrix[[3, 10]])
    with pytest.raises(PreconditionError):
        part.row_for_weight(4)


def test_disparity_frame_layout(tanh_net):
    idx = FrequencyIndexSet([1])
    H = build_disparity(tanh_net, idx, QuadratureGrid.for_index_set(idx))
    frame = H.to_frame()
    assert list(frame.columns) == ["m", "k_1", "re", "im"]
    assert len(frame) == tanh_net.num_weights * 3


def test_numerical_rank_of_known_spectrum():
    report = numerical_rank(np.diag([1.0, 1e-3, 1e-14]))
    assert report.numerical_rank == 2
    assert report.tolerance_used == pytest.approx(3e-10)
    assert report.sigma_min_over_sigma_max == pytest.approx(1e-14)
    assert not report.is_full_rank
    assert report.rank_deficit == 1
    assert report.to_dict()["hermitian_real_dof"] == 3


def test_numerical_rank_edge_cases():
    assert numerical_rank(np.zeros((3, 2))).numerical_rank == 0
    with pytest.raises(PreconditionError):
        numerical_rank(np.eye(2), rel_tol=0.0)


def test_random_complex_tall_matrices_are_full_rank():
    n = 6
    for seed in range(100):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((2 * n, n)) + 1j * rng.standard_normal((2 * n, n))
        assert numerical_rank(A, 1e-10).numerical_rank == n


def test_copied_row_drops_square_rank_by_one():
    rng = np.random.default_rng(11)
    n = 6
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert numerical_rank(A).is_full_rank
    A[3] = A[1]
    assert numerical_rank(A).numerical_rank == n - 1


def test_linear_network_has_rank_two():
    net = MlpNetwork(Architecture(1, (), "tanh"), [0.4, -0.1])
    idx = FrequencyIndexSet([3])
    report = numerical_rank(build_disparity(net, idx, QuadratureGrid.for_index_set(idx)))
    assert report.numerical_rank == 2
    assert report.n_columns == 7


def test_dead_network_is_rank_one():
    arch = Architecture(1, (4,), "relu")
    base = init_random(arch, InitScheme(), seed=2)
    net = make_degenerate(base, kill_all(base))
    idx = FrequencyIndexSet([3])
    H = build_disparity(net, idx, QuadratureGrid.for_index_set(idx))
    assert numerical_rank(H).numerical_rank == 1


def test_duplicated_neurons_share_rows(tanh_net):
    net = make_degenerate(tanh_net, DuplicateNeuron((0, 2), (0, 5)))
    idx = FrequencyIndexSet([3])
    H = build_disparity(net, idx, QuadratureGrid.for_index_set(idx))
    arch = net.architecture
    for a, b in zip(arch.incoming_indices(NeuronId(0, 2)), arch.incoming_indices(NeuronId(0, 5))):
        np.testing.assert_array_equal(H.row_for_weight(a), H.row_for_weight(b))


def test_duplication_drops_rank_when_weights_equal_columns():
    # 1-2-1 has M = 7 = N for N_1 = 3.
    arch = Architecture(1, (2,), "tanh")
    idx = FrequencyIndexSet([3])
    grid = QuadratureGrid.for_index_set(idx)
    net = init_random(arch, InitScheme("center_cutting", scale=3.0), seed=4)
    assert net.num_weights == len(idx)
    duplicated = make_degenerate(net, DuplicateNeuron((0, 0), (0, 1)))
    assert numerical_rank(build_disparity(duplicated, idx, grid)).numerical_rank <= len(idx) - 1


def test_canonical_gradient_matches_definition(random_hermitian, small_data):
    idx = FrequencyIndexSet([2])
    coeffs = random_hermitian(idx)
    g = canonical_gradient(coeffs, small_data)
    eta = np.exp(2j * np.pi * small_data.X[:, 0][:, None] * idx.frequencies[:, 0][None, :])
    residual = 2.0 * ((eta @ coeffs.values).real - small_data.y)
    np.testing.assert_allclose(g, eta.T @ residual, atol=1e-12)


def test_canonical_gradient_matches_finite_differences(random_hermitian, small_data):
    # With theta_k = a_k + i b_k the linear gradient is dQ/da_k - i dQ/db_k.
    idx = FrequencyIndexSet([2])
    coeffs = random_hermitian(idx)
    g = canonical_gradient(coeffs, small_data)
    h = 1e-6
    for k in range(len(idx)):
        partials = []
        for direction in (1.0, 1j):
            step = np.zeros(len(idx), dtype=complex)
            step[k] = h * direction
            plus = canonical_loss(CanonicalCoeffs(idx, coeffs.values + step), small_data)
            minus = canonical_loss(CanonicalCoeffs(idx, coeffs.values - step), small_data)
            partials.append((plus - minus) / (2 * h))
        expected = partials[0] - 1j * partials[1]
        assert g[k] == pytest.approx(expected, rel=1e-6, abs=1e-8)


def test_canonical_gradient_single_sample_at_origin():
    idx = FrequencyIndexSet([3])
    values = np.zeros(len(idx), dtype=complex)
    values[idx.index_of(0)] = 1.0
    g = canonical_gradient(CanonicalCoeffs(idx, values), TrainingSet([[0.0]], [0.0]))
    np.testing.assert_allclose(g, np.full(len(idx), 2.0), atol=1e-15)


def test_canonical_gradient_at_network_uses_network_predictions(small_data):
    net = MlpNetwork(Architecture(1, (), "tanh"), [0.0, 0.25])
    idx = FrequencyIndexSet([1])
    g = canonical_gradient_at_network(net, small_data, idx)
    residual = 2.0 * (0.25 - small_data.y)
    assert g[idx.index_of(0)] == pytest.approx(residual.sum())


def test_chain_rule_exact_for_band_limited_network(small_data):
    net, trainable = band_limited_network()
    idx = FrequencyIndexSet([3])
    H = build_disparity(net, idx, QuadratureGrid.for_index_set(idx), weight_indices=trainable)
    residual = chain_rule_residual(net, small_data, H)
    assert residual.rel_residual <= 1e-8
    assert residual.imag_residue <= 1e-8


def test_chain_rule_residual_vanishes_for_zero_network():
    net = MlpNetwork.zeros(Architecture(1, (3,), "tanh"))
    data = TrainingSet([[0.2], [0.7]], [0.0, 0.0])
    idx = FrequencyIndexSet([2])
    H = build_disparity(net, idx, QuadratureGrid.for_index_set(idx))
    result = chain_rule_residual(net, data, H)
    assert result.rel_residual == 0.0
    assert result.imag_residue == 0.0


def test_chain_rule_residual_shrinks_with_refinement(tanh_net):
    data = TrainingSet([[0.3], [0.45], [0.6], [0.7]], [0.2, -0.4, 0.3, 0.1])
    residuals = []
    for n in (4, 8, 16, 32):
        idx = FrequencyIndexSet([n])
        H = build_disparity(tanh_net, idx, QuadratureGrid.for_index_set(idx))
        result = chain_rule_residual(tanh_net, data, H)
        assert result.imag_residue <= 1e-8
        residuals.append(result.rel_residual)
    assert residuals[-1] < residuals[0]
    assert residuals[2] < residuals[0]


def test_decision_table():
    assert decide(1.0, 0.0, True, 1e-3, 0.0) is Verdict.NOT_STATIONARY
    assert decide(1e-6, 5.0, True, 1e-3, 1e-6) is Verdict.GLOBAL_MINIMUM_CERTIFICATE
    assert decide(1e-6, 1e-6, False, 1e-3, 1e-6) is Verdict.GLOBAL_MINIMUM_CERTIFICATE
    assert decide(1e-6, 5.0, False, 1e-3, 1.0) is Verdict.NON_GLOBAL_STATIONARY
    assert decide(1e-6, float("nan"), False, 1e-3, 0.0) is Verdict.INDETERMINATE_RANK_DEFICIENT


@pytest.mark.parametrize("full_rank, canonical_norm", [(True, 5.0), (False, 0.0)])
def test_no_certificate_above_loss_scale(full_rank, canonical_norm):
    assert decide(0.0, canonical_norm, full_rank, 0.1, 1.0) is Verdict.GLOBAL_MINIMUM_CERTIFICATE
    assert decide(0.0, canonical_norm, full_rank, 0.1, 1.01) is Verdict.INDETERMINATE_RANK_DEFICIENT
    assert decide(0.0, canonical_norm, full_rank, 0.1, float("nan")) is not (
        Verdict.GLOBAL_MINIMUM_CERTIFICATE
    )


def test_stationary_point_with_large_loss_is_not_certified():
    # Zero weights give f = 0 and a vanishing DC coefficient of the residual.
    net = MlpNetwork.zeros(Architecture(1, (2,), "tanh"))
    data = TrainingSet([[0.25], [0.75]], [1.0, -1.0])
    H = build_disparity(net, FrequencyIndexSet([0]), QuadratureGrid([4]))
    result = classify_stationary_point(net, data, H, grad_tol=0.1)
    assert result.literal_grad_norm == 0.0
    assert result.canonical_grad_norm == 0.0
    assert result.loss == pytest.approx(2.0)
    assert result.verdict is Verdict.INDETERMINATE_RANK_DEFICIENT


def test_interpolating_full_rank_point_is_certified():
    net = MlpNetwork(Architecture(1, (), "tanh"), [2.0, 0.5])
    data = TrainingSet([[0.25], [0.75]], [1.0, 2.0])
    idx = FrequencyIndexSet([0])
    H = build_disparity(net, idx, QuadratureGrid.for_index_set(idx))
    result = classify_stationary_point(net, data, H, grad_tol=1e-9)
    assert result.verdict is Verdict.GLOBAL_MINIMUM_CERTIFICATE
    assert result.loss == 0.0


def test_dead_network_at_best_constant_is_non_global():
    arch = Architecture(1, (4,), "relu")
    base = init_random(arch, InitScheme(), seed=9)
    net = make_degenerate(base, kill_all(base))
    data = TrainingSet([[0.1], [0.35], [0.6], [0.85]], [1.0, -1.0, 0.5, 0.2])
    weights = net.weights.copy()
    weights[-1] = data.y.mean()
    net = net.with_weights(weights)
    idx = FrequencyIndexSet([2])
    H = build_disparity(net, idx, QuadratureGrid.for_index_set(idx))
    result = classify_stationary_point(net, data, H, grad_tol=1e-3)
    assert result.literal_grad_norm <= 1e-12
    assert not result.rank_report.is_full_rank
    assert result.canonical_grad_norm > 1e-3
    assert result.verdict is Verdict.NON_GLOBAL_STATIONARY


def test_random_network_is_not_stationary(tanh_net, small_data):
    idx = FrequencyIndexSet([2])
    H = build_disparity(tanh_net, idx, QuadratureGrid.for_index_set(idx))
    result = classify_stationary_point(tanh_net, small_data, H, grad_tol=1e-8)
    assert result.verdict is Verdict.NOT_STATIONARY


def test_classify_rejects_foreign_disparity(tanh_net, small_data):
    other = MlpNetwork(Architecture(1, (3,), "tanh"), np.zeros(10))
    idx = FrequencyIndexSet([1])
    H = build_disparity(other, idx, QuadratureGrid.for_index_set(idx))
    with pytest.raises(PreconditionError):
        classify_stationary_point(tanh_net, small_data, H, grad_tol=1e-3)
