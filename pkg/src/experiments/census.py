"""Random-initialization rank census."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src.config.models import DegeneracySection, ExperimentConfig
from src.config.settings import settings
from src.constants import CENSUS_COLUMNS, DEAD_RANGE_TOL, RANK_REL_TOL, SEED_COMPONENT_CENSUS
from src.disparity.matrix import build_disparity
from src.disparity.rank import numerical_rank
from src.exceptions import CanonlabError, PreconditionError
from src.experiments.runner import apply_degeneracy
from src.experiments.storage import ArtifactStorage
from src.fourier.grids import FrequencyIndexSet, QuadratureGrid
from src.nn_core.degeneracy import detect_dead_neurons, detect_duplicated_neurons, uniform_probe_grid
from src.nn_core.network import Architecture
from src.trainer.init import InitScheme, init_random
from src.utils.logger import get_logger
from src.utils.seeding import split_seed

logger = get_logger(__name__)

DUPLICATE_TOL = 1e-10


@dataclass
class CensusResult:
    rows: pd.DataFrame
    aggregate: Dict[str, Any]


def aggregate_census(rows: pd.DataFrame) -> Dict[str, Any]:
    """Full-rank frequency is the mean of ``full_rank`` over the seeds that succeeded."""
    ok = rows[rows["status"] == "ok"]
    n_ok = len(ok)
    return {
        "n_seeds": int(len(rows)),
        "n_succeeded": int(n_ok),
        "n_failed": int(len(rows) - n_ok),
        "full_rank_frequency": float(ok["full_rank"].astype(bool).mean()) if n_ok else None,
        "mean_sigma_ratio": float(ok["sigma_ratio"].mean()) if n_ok else None,
        "min_numerical_rank": int(ok["numerical_rank"].min()) if n_ok else None,
    }


def run_init_rank_census(
    arch: Architecture,
    scheme: InitScheme,
    n_seeds: int,
    idx: FrequencyIndexSet,
    grid: QuadratureGrid,
    base_seed: int = 0,
    rank_tol: float = RANK_REL_TOL,
    degeneracy: Optional[DegeneracySection] = None,
    workers: Optional[int] = None,
) -> CensusResult:
    """
    Initialize one network per seed, build H(w) and record its rank and degeneracies.

    Seeds are split from ``base_seed``; rows come back in seed order whatever the
    number of workers. A seed that fails is recorded as a failed row.

    Args:
        arch: Architecture
        scheme: Initialization scheme
        n_seeds: Number of seeds
        idx: Index set
        grid: Quadrature grid
        base_seed: Census seed
        rank_tol: Relative rank tolerance
        degeneracy: Optional degeneracy injected after every initialization
        workers: Thread count; CANONLAB_WORKERS by default

    Returns:
        CensusResult with one row per seed and the aggregate

    Raises:
        PreconditionError: If n_seeds < 1 or M < N
    """
    if n_seeds < 1:
        raise PreconditionError(f"n_seeds must be >= 1, got {n_seeds}")
    if arch.num_weights < len(idx):
        raise PreconditionError(f"M = {arch.num_weights} < N = {len(idx)}: H can never be full rank")
    grid.check_nyquist(idx)
    workers = workers or settings.config.workers
    probe = uniform_probe_grid(arch.input_dim)

    def census_row(i: int) -> Dict[str, Any]:
        seed = split_seed(base_seed, SEED_COMPONENT_CENSUS, i)
        row: Dict[str, Any] = {"seed": seed, "n_columns": len(idx)}
        try:
            net = init_random(arch, scheme, seed)
            if degeneracy is not None and not degeneracy.is_empty:
                net = apply_degeneracy(net, degeneracy)
            H = build_disparity(net, idx, grid)
            report = numerical_rank(H, rank_tol)
            row.update(
                status="ok",
                numerical_rank=report.numerical_rank,
                full_rank=report.is_full_rank,
                sigma_ratio=report.sigma_min_over_sigma_max,
                disparity_norm=H.frobenius_norm(),
                dead_neurons=len(detect_dead_neurons(net, probe, DEAD_RANGE_TOL)),
                duplicated_pairs=len(detect_duplicated_neurons(net, DUPLICATE_TOL)),
                error=None,
            )
        except CanonlabError as e:
            logger.warning(f"Census seed {i} ({seed}) failed: {e}")
            row.update(status="failed", error=str(e))
        return row

    logger.info(f"Rank census: {n_seeds} seeds, {arch}, N = {len(idx)}, {workers} worker(s)")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(executor.map(census_row, range(n_seeds)))

    frame = pd.DataFrame(rows, columns=CENSUS_COLUMNS)
    for column in ("numerical_rank", "dead_neurons", "duplicated_pairs"):
        frame[column] = frame[column].astype("Int64")
    frame["full_rank"] = frame["full_rank"].astype("boolean")
    frame["sigma_ratio"] = frame["sigma_ratio"].astype(np.float64)
    frame["disparity_norm"] = frame["disparity_norm"].astype(np.float64)
    aggregate = aggregate_census(frame)
    logger.info(f"Full-rank frequency: {aggregate['full_rank_frequency']}")
    return CensusResult(frame, aggregate)


def census_from_config(
    config: ExperimentConfig,
    n_seeds: int,
    storage: Optional[ArtifactStorage] = None,
    workers: Optional[int] = None,
) -> CensusResult:
    """Run the census for a config's network, init and truncation, writing census.csv and census_summary.json."""
    storage = storage or ArtifactStorage(config.output_dir)
    logger.info("=" * 60)
    logger.info(f"Census for {config.name or '<unnamed>'}")
    logger.info("=" * 60)
    arch = Architecture(
        config.network.input_dim, tuple(config.network.hidden_sizes), config.network.activation
    )
    result = run_init_rank_census(
        arch,
        InitScheme.from_section(config.init),
        n_seeds,
        FrequencyIndexSet(config.canonical.per_dim_limits),
        QuadratureGrid(config.canonical.grid_points_per_dim),
        base_seed=config.seed,
        rank_tol=config.monitor.rank_rel_tol,
        degeneracy=config.degeneracy,
        workers=workers,
    )
    storage.save_frame(result.rows, "census.csv")
    storage.save_json(result.aggregate, "census_summary.json")
    return result
