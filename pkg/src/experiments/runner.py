"""Config-driven experiment pipeline."""

import math
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, Field

from src.canonical_solver.solver import solve_zero_loss
from src.config.models import DegeneracySection, ExperimentConfig
from src.disparity.matrix import build_disparity
from src.disparity.stationary import classify_stationary_point
from src.exceptions import CanonlabError, ConfigError, DivergenceError, NumericalError
from src.experiments.generator import gen_synthetic_dataset
from src.experiments.plots import loss_figure, rank_figure
from src.experiments.storage import ArtifactStorage
from src.fourier.grids import FrequencyIndexSet, QuadratureGrid
from src.fourier.projection import project_network
from src.nn_core.network import Architecture, MlpNetwork
from src.nn_core.serialization import dumps_network
from src.trainer.degenerate import DuplicateNeuron, KillNeurons, kill_all, make_degenerate
from src.trainer.init import InitScheme, init_random
from src.trainer.sgd import MonitorSpec, TrainSchedule, sgd_train
from src.trainer.trace import TrainingTrace
from src.utils.logger import get_logger

logger = get_logger(__name__)

ErrorCategory = Literal["config", "numerical", "runtime"]


def finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


class RunSummary(BaseModel):
    """Headline numbers of a finished run."""

    final_loss: Optional[float] = None
    final_rank: Optional[int] = None
    n_columns: int
    steps: int = 0
    verdict: Optional[str] = None
    classification: Dict[str, Any] = Field(default_factory=dict)
    degeneracy: Dict[str, Optional[int]] = Field(default_factory=dict)
    canonical_fit: Dict[str, Any] = Field(default_factory=dict)


class ExperimentReport(BaseModel):
    """Outcome of run_experiment. Every file it names exists."""

    name: Optional[str] = None
    status: Literal["success", "failed"] = "success"
    error: Optional[str] = None
    error_category: Optional[ErrorCategory] = None
    config: Dict[str, Any]
    output_dir: str
    files: Dict[str, str] = Field(default_factory=dict)
    summary: Optional[RunSummary] = None

    @property
    def exit_code(self) -> int:
        if self.status == "success":
            return 0
        return 1 if self.error_category == "config" else 2


def apply_degeneracy(net: MlpNetwork, section: DegeneracySection) -> MlpNetwork:
    if section.kill == "all":
        net = make_degenerate(net, kill_all(net))
    elif section.kill:
        net = make_degenerate(net, KillNeurons(section.kill))
    if section.duplicate is not None:
        net = make_degenerate(net, DuplicateNeuron(section.duplicate.src, section.duplicate.dst))
    return net


def _categorize(error: Exception) -> ErrorCategory:
    if isinstance(error, ConfigError):
        return "config"
    if isinstance(error, NumericalError):
        return "numerical"
    if isinstance(error, CanonlabError):
        return "config"
    return "runtime"


def _save_trace(storage: ArtifactStorage, trace: TrainingTrace, files: Dict[str, str]) -> None:
    files["trace"] = str(storage.save_frame(trace.to_frame(), "trace.csv"))
    files["trace_diagnostics"] = str(
        storage.save_frame(trace.to_frame(extended=True), "trace_diagnostics.csv")
    )


def run_experiment(config: ExperimentConfig, storage: Optional[ArtifactStorage] = None) -> ExperimentReport:
    """
    Run init, optional degeneracy injection, monitored SGD, the final stationary-point
    classification and the direct canonical-space solve, writing every artifact
    below ``config.output_dir``.

    Errors are caught here and turned into a failed report; artifacts written
    before the failure are kept.

    Args:
        config: Validated experiment configuration
        storage: Artifact storage; one rooted at config.output_dir by default

    Returns:
        ExperimentReport
    """
    storage = storage or ArtifactStorage(config.output_dir)
    idx = FrequencyIndexSet(config.canonical.per_dim_limits)
    grid = QuadratureGrid(config.canonical.grid_points_per_dim)
    report = ExperimentReport(
        name=config.name,
        config=config.model_dump(mode="json"),
        output_dir=str(storage.root),
    )
    files = report.files

    logger.info("=" * 60)
    logger.info(f"Running experiment {config.name or '<unnamed>'} (seed {config.seed})")
    logger.info("=" * 60)

    try:
        files["config"] = str(storage.save_json(report.config, "config.json"))

        data = gen_synthetic_dataset(
            config.data.kind,
            config.data.T,
            config.network.input_dim,
            config.seed,
            bandwidth=config.data.coeff_bandwidth,
            label_seed=config.data.label_seed,
        )
        files["data"] = str(storage.save_frame(data.to_frame(), "data.csv"))

        arch = Architecture(
            config.network.input_dim, tuple(config.network.hidden_sizes), config.network.activation
        )
        net = init_random(arch, InitScheme.from_section(config.init), config.seed)
        if not config.degeneracy.is_empty:
            net = apply_degeneracy(net, config.degeneracy)
            logger.info(f"Injected degeneracy: {config.degeneracy.model_dump(mode='json')}")
        files["initial_network"] = str(storage.save_text(dumps_network(net), "initial_network.json"))

        logger.info(f"Training {net!r} on {data!r} with N = {len(idx)}")
        try:
            net, trace = sgd_train(
                net, data, "mse", TrainSchedule.from_config(config), MonitorSpec.from_config(config)
            )
        except DivergenceError as e:
            if e.trace is not None:
                _save_trace(storage, e.trace, files)
            raise
        _save_trace(storage, trace, files)
        files["final_network"] = str(storage.save_text(dumps_network(net), "final_network.json"))

        logger.info("Classifying the final point")
        H = build_disparity(net, idx, grid)
        classification = classify_stationary_point(
            net, data, H, config.monitor.grad_tol, config.monitor.rank_rel_tol
        )
        files["disparity"] = str(storage.save_frame(H.to_frame(), "disparity.csv"))
        rank_payload = classification.rank_report.to_dict()
        rank_payload["frobenius_norm"] = H.frobenius_norm()
        files["rank_report"] = str(storage.save_json(rank_payload, "rank_report.json"))
        files["network_coeffs"] = str(
            storage.save_frame(project_network(net, idx, grid).to_frame(), "network_coeffs.csv")
        )

        logger.info("Solving the canonical problem directly for comparison")
        fit = solve_zero_loss(data, idx)
        files["canonical_coeffs"] = str(storage.save_frame(fit.coeffs.to_frame(), "canonical_coeffs.csv"))

        files["loss_plot"] = str(storage.save_figure(loss_figure(trace, config.name), "loss.svg"))
        files["rank_plot"] = str(
            storage.save_figure(rank_figure(trace, len(idx), config.name), "rank.svg")
        )

        report.summary = RunSummary(
            final_loss=finite_or_none(trace.final_full_loss),
            final_rank=trace.final_rank,
            n_columns=len(idx),
            steps=trace.rows[-1].step,
            verdict=classification.verdict.value,
            classification=classification.to_dict(),
            degeneracy=trace.degeneracy_summary(),
            canonical_fit=fit.to_dict("canonical_coeffs.csv"),
        )
        report.summary.canonical_fit["condition_number"] = finite_or_none(fit.condition_number)
        logger.info(
            f"Finished: Q={report.summary.final_loss}, rank={report.summary.final_rank}/{len(idx)}, "
            f"verdict={report.summary.verdict}"
        )
    except Exception as e:
        logger.error(f"Experiment {config.name or '<unnamed>'} failed: {e}", exc_info=True)
        report.status = "failed"
        report.error = str(e)
        report.error_category = _categorize(e)

    files["summary"] = str(storage.path_for("summary.json"))
    storage.save_json(report.model_dump(mode="json"), "summary.json")
    return report
