"""Tests for dataset generators, config validation, the run pipeline, census and storage."""

import json

import numpy as np
import pandas as pd
import pytest

from src.config.models import DegeneracySection
from src.config.settings import parse_experiment_config, settings
from src.exceptions import ConfigError, PreconditionError
from src.experiments.census import run_init_rank_census
from src.experiments.generator import gen_synthetic_dataset, load_generator
from src.experiments.plots import loss_figure, rank_figure
from src.experiments.runner import run_experiment
from src.experiments.storage import ArtifactStorage
from src.fourier.grids import FrequencyIndexSet, QuadratureGrid
from src.fourier.projection import partial_sum_components
from src.nn_core.network import Architecture
from src.trainer.init import InitScheme
from src.trainer.trace import TraceRow, TrainingTrace


# Generators

@pytest.mark.parametrize("kind", ["planted_fourier", "random_labels"])
def test_generators_are_deterministic(kind):
    a = gen_synthetic_dataset(kind, 6, 2, seed=4)
    b = gen_synthetic_dataset(kind, 6, 2, seed=4)
    c = gen_synthetic_dataset(kind, 6, 2, seed=5)
    assert a == b
    assert not np.array_equal(a.X, c.X)


def test_generated_inputs_are_separated_and_in_cube():
    data = gen_synthetic_dataset("random_labels", 200, 1, seed=0)
    assert data.min_separation() >= 1e-6
    assert data.X.min() >= 0.0 and data.X.max() <= 1.0
    assert np.all(np.abs(data.y) <= 1.0)


def test_label_seed_changes_only_labels():
    a = gen_synthetic_dataset("random_labels", 5, 1, seed=2, label_seed=0)
    b = gen_synthetic_dataset("random_labels", 5, 1, seed=2, label_seed=1)
    np.testing.assert_array_equal(a.X, b.X)
    assert not np.array_equal(a.y, b.y)


def test_planted_labels_come_from_planted_coefficients():
    data = gen_synthetic_dataset("planted_fourier", 7, 1, seed=9, bandwidth=3)
    planted = load_generator("planted_fourier").planted_coefficients(1, 3, seed=9)
    assert planted.is_hermitian()
    values, _ = partial_sum_components(planted, data.X)
    np.testing.assert_allclose(data.y, values, atol=1e-12)


def test_unknown_dataset_kind():
    with pytest.raises(ConfigError):
        load_generator("mnist")


def test_generator_rejects_empty_request():
    with pytest.raises(PreconditionError):
        gen_synthetic_dataset("random_labels", 0, 1, seed=0)


# Config validation

def test_bundled_config_round_trips():
    config = settings.load_experiment_config("configs/smoke.json")
    assert config.canonical.cardinality == 9
    again = parse_experiment_config(config.model_dump(mode="json"))
    assert again == config


def test_default_grid_follows_truncation(tiny_config):
    config = parse_experiment_config(tiny_config)
    assert config.canonical.grid_points_per_dim == [12]


@pytest.mark.parametrize(
    "section, update, fragment",
    [
        ("canonical", {"per_dim_limits": [0]}, "N = 1 < T = 3"),
        ("canonical", {"per_dim_limits": [2], "grid_points_per_dim": [5]}, "Nyquist"),
        ("train", {"epochs": 1, "minibatch": 4, "lr0": 0.1}, "exceeds T"),
        ("network", {"input_dim": 1, "hidden_sizes": [0]}, "positive"),
    ],
)
def test_invalid_configs_name_the_violation(tiny_config, section, update, fragment):
    tiny_config[section] = update
    with pytest.raises(ConfigError, match=fragment):
        parse_experiment_config(tiny_config)


def test_unknown_keys_are_rejected(tiny_config):
    tiny_config["optimizer"] = "adam"
    with pytest.raises(ConfigError):
        parse_experiment_config(tiny_config)


def test_missing_config_file():
    with pytest.raises(ConfigError):
        settings.load_experiment_config("configs/does_not_exist.json")


# Run pipeline

def test_tiny_run_writes_every_artifact(tiny_config, tmp_path):
    report = run_experiment(parse_experiment_config(tiny_config))
    assert report.status == "success" and report.exit_code == 0
    out = tmp_path / "tiny"
    for name in (
        "config.json",
        "data.csv",
        "initial_network.json",
        "trace.csv",
        "trace_diagnostics.csv",
        "final_network.json",
        "network_coeffs.csv",
        "canonical_coeffs.csv",
        "disparity.csv",
        "rank_report.json",
        "loss.svg",
        "rank.svg",
        "summary.json",
    ):
        assert (out / name).exists(), name
    summary = json.loads((out / "summary.json").read_text())
    assert summary["summary"]["steps"] == 20
    assert summary["summary"]["n_columns"] == 5
    assert summary["summary"]["canonical_fit"]["final_loss"] < 1e-12
    trace = pd.read_csv(out / "trace.csv")
    assert list(trace["step"]) == list(range(21))
    rank_report = json.loads((out / "rank_report.json").read_text())
    assert rank_report["numerical_rank"] == summary["summary"]["classification"]["numerical_rank"]
    assert len(rank_report["singular_values"]) == 5
    assert rank_report["tolerance_used"] > 0
    disparity = pd.read_csv(out / "disparity.csv")
    assert len(disparity) == 13 * 5


def test_run_traces_are_byte_identical(tiny_config, tmp_path):
    first = parse_experiment_config(tiny_config)
    second = first.model_copy(update={"output_dir": str(tmp_path / "again")})
    run_experiment(first)
    run_experiment(second)
    assert (tmp_path / "tiny" / "trace.csv").read_bytes() == (tmp_path / "again" / "trace.csv").read_bytes()
    assert (tmp_path / "tiny" / "final_network.json").read_bytes() == (
        tmp_path / "again" / "final_network.json"
    ).read_bytes()


def test_all_dead_run_is_a_non_global_stationary_point(tmp_path):
    config = settings.load_experiment_config("configs/dead_neurons.json")
    config = config.model_copy(update={"output_dir": str(tmp_path / "dead")})
    report = run_experiment(config)
    assert report.status == "success"
    assert report.summary.final_rank == 1
    assert report.summary.verdict == "non_global_stationary"
    assert report.summary.degeneracy["final_dead"] == 16


def test_divergent_run_fails_with_partial_trace(tiny_config, tmp_path):
    tiny_config["network"] = {"input_dim": 1, "hidden_sizes": [], "activation": "tanh"}
    tiny_config["train"] = {"epochs": 500, "minibatch": 3, "lr0": 1000.0}
    report = run_experiment(parse_experiment_config(tiny_config))
    assert report.status == "failed"
    assert report.error_category == "numerical"
    assert report.exit_code == 2
    assert (tmp_path / "tiny" / "trace.csv").exists()
    assert json.loads((tmp_path / "tiny" / "summary.json").read_text())["status"] == "failed"


# Census

def _census(workers=1, degeneracy=None, activation="tanh"):
    idx = FrequencyIndexSet([2])
    return run_init_rank_census(
        Architecture(1, (8,), activation),
        InitScheme("center_cutting", scale=2.0),
        4,
        idx,
        QuadratureGrid.for_index_set(idx),
        base_seed=13,
        degeneracy=degeneracy,
        workers=workers,
    )


def test_census_is_deterministic_across_worker_counts():
    serial = _census(workers=1)
    parallel = _census(workers=2)
    pd.testing.assert_frame_equal(serial.rows, parallel.rows)
    assert list(serial.rows["seed"]) == list(_census().rows["seed"])


def test_census_aggregate_matches_rows():
    result = _census()
    rows, aggregate = result.rows, result.aggregate
    assert aggregate["n_seeds"] == 4 and aggregate["n_failed"] == 0
    assert aggregate["full_rank_frequency"] == pytest.approx(rows["full_rank"].astype(bool).mean())
    assert aggregate["min_numerical_rank"] == rows["numerical_rank"].min()
    assert rows["seed"].is_unique


def test_census_with_all_neurons_killed_is_rank_deficient():
    result = _census(degeneracy=DegeneracySection(kill="all"), activation="relu")
    assert (result.rows["numerical_rank"] < 5).all()
    assert (result.rows["dead_neurons"] == 8).all()
    assert result.aggregate["full_rank_frequency"] == 0.0


def test_census_preconditions():
    idx = FrequencyIndexSet([3])
    grid = QuadratureGrid.for_index_set(idx)
    with pytest.raises(PreconditionError):
        run_init_rank_census(Architecture(1, (1,), "tanh"), InitScheme(), 2, idx, grid)
    with pytest.raises(PreconditionError):
        run_init_rank_census(Architecture(1, (8,), "tanh"), InitScheme(), 0, idx, grid)


# Storage and plots

def test_storage_writes_atomically(tmp_path):
    storage = ArtifactStorage(tmp_path / "out")
    storage.save_frame(pd.DataFrame({"a": [1.0, None]}), "table.csv")
    assert (tmp_path / "out" / "table.csv").read_text().splitlines() == ["a", "1", ""]

    def broken(_):
        raise OSError("disk full")

    with pytest.raises(OSError):
        storage._atomic_write("broken.csv", broken)
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["table.csv"]


def test_parquet_export(tmp_path):
    pytest.importorskip("pyarrow")
    storage = ArtifactStorage(tmp_path, export_parquet=True)
    df = pd.DataFrame({"shell": [0, 1], "max_abs_coeff": [0.5, 0.25]})
    storage.save_frame(df, "decay.csv")
    pd.testing.assert_frame_equal(pd.read_parquet(tmp_path / "decay.parquet"), df)


def test_plots_render_reproducible_svg(tmp_path):
    trace = TrainingTrace(
        [
            TraceRow(0, 0, 2.0, 1.0, full_loss=2.0, rank=3),
            TraceRow(1, 1, 1.0, 0.5),
            TraceRow(2, 2, None, 0.1, full_loss=0.0, rank=4),
        ]
    )
    storage = ArtifactStorage(tmp_path)
    a = storage.save_figure(loss_figure(trace, "demo"), "a.svg")
    b = storage.save_figure(loss_figure(trace, "demo"), "b.svg")
    assert a.read_bytes() == b.read_bytes()
    assert b"<svg" in a.read_bytes()
    assert storage.save_figure(rank_figure(trace, 5), "rank.svg").stat().st_size > 0
