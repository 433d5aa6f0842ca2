#!/usr/bin/env python3
"""Command-line entry point for canonlab experiments and diagnostics."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import pandas as pd

from src.canonical_solver.solver import convex_gd, max_stable_lr, solve_zero_loss
from src.config.settings import settings
from src.disparity.matrix import build_disparity
from src.disparity.rank import numerical_rank
from src.exceptions import CanonlabError, ConfigError, NumericalError
from src.experiments.census import census_from_config
from src.experiments.runner import run_experiment
from src.experiments.storage import ArtifactStorage
from src.fourier.grids import FrequencyIndexSet, QuadratureGrid
from src.fourier.projection import decay_profile, partial_sum_components, project_network, truncation_error
from src.nn_core.dataset import TrainingSet
from src.nn_core.network import MlpNetwork, forward_batch
from src.nn_core.serialization import load_network
from src.utils.logger import get_logger, setup_logger

logger = get_logger("canonlab.cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class CliParser(argparse.ArgumentParser):
    """Usage errors are configuration errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _storage(args: argparse.Namespace, command: str) -> ArtifactStorage:
    root = args.output_dir or str(Path(settings.config.output_dir) / command)
    return ArtifactStorage(root)


def _load_network(path: str) -> MlpNetwork:
    resolved = settings.resolve_path(path)
    if not resolved.exists():
        raise ConfigError(f"Network file not found: {path}")
    try:
        return load_network(resolved)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"Cannot read network {path}: {e}") from e


def _truncation(args: argparse.Namespace, input_dim: int):
    if len(args.n) != input_dim:
        raise ConfigError(f"--n has {len(args.n)} entries but the input dimension is {input_dim}")
    idx = FrequencyIndexSet(args.n)
    grid = QuadratureGrid(args.grid) if args.grid else QuadratureGrid.for_index_set(idx)
    return idx, grid


def cmd_run(args: argparse.Namespace) -> int:
    config = settings.load_experiment_config(args.config)
    if args.output_dir:
        config = config.model_copy(update={"output_dir": args.output_dir})
    report = run_experiment(config)
    if report.status == "success":
        logger.info(f"Run succeeded: verdict {report.summary.verdict}, summary in {report.files['summary']}")
    else:
        logger.error(f"Run failed ({report.error_category}): {report.error}")
    return report.exit_code


def cmd_census(args: argparse.Namespace) -> int:
    config = settings.load_experiment_config(args.config)
    if args.output_dir:
        config = config.model_copy(update={"output_dir": args.output_dir})
    result = census_from_config(config, args.seeds, workers=args.workers)
    logger.info(
        f"Census: {result.aggregate['n_succeeded']}/{result.aggregate['n_seeds']} seeds, "
        f"full-rank frequency {result.aggregate['full_rank_frequency']}"
    )
    return EXIT_OK


def cmd_fourier(args: argparse.Namespace) -> int:
    net = _load_network(args.net)
    idx, grid = _truncation(args, net.input_dim)
    storage = _storage(args, "fourier")

    logger.info("=" * 60)
    logger.info(f"Fourier coefficients of {net!r} on {idx}, {grid}")
    logger.info("=" * 60)
    coeffs = project_network(net, idx, grid)
    error = truncation_error(lambda X: forward_batch(net, X), coeffs, grid.refined(2))
    storage.save_frame(coeffs.to_frame(), "fourier_coeffs.csv")
    storage.save_frame(
        pd.DataFrame(decay_profile(coeffs), columns=["shell", "max_abs_coeff"]), "decay_profile.csv"
    )
    storage.save_json(
        {
            "n_coefficients": len(idx),
            "per_dim_limits": list(idx.per_dim_limits),
            "grid_points_per_dim": list(grid.points_per_dim),
            "truncation_error_sq": error,
            "energy": coeffs.energy(),
            "hermitian_defect": coeffs.hermitian_defect(),
        },
        "fourier_summary.json",
    )
    logger.info(f"Squared truncation error {error:.3e}")
    return EXIT_OK


def cmd_rank(args: argparse.Namespace) -> int:
    net = _load_network(args.net)
    idx, grid = _truncation(args, net.input_dim)
    storage = _storage(args, "rank")

    H = build_disparity(net, idx, grid)
    report = numerical_rank(H, args.rel_tol)
    storage.save_frame(H.to_frame(), "disparity.csv")
    payload = report.to_dict()
    payload["frobenius_norm"] = H.frobenius_norm()
    storage.save_json(payload, "rank_report.json")
    logger.info(f"Numerical rank {report.numerical_rank}/{report.n_columns} (M = {report.n_rows})")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    path = settings.resolve_path(args.data)
    if not path.exists():
        raise ConfigError(f"Training set file not found: {args.data}")
    try:
        data = TrainingSet.from_csv(path)
    except (ValueError, KeyError) as e:
        raise ConfigError(f"Cannot read training set {args.data}: {e}") from e
    idx, _ = _truncation(args, data.input_dim)
    storage = _storage(args, "solve")

    if args.solver == "direct":
        fit = solve_zero_loss(data, idx)
    else:
        lr = args.lr if args.lr is not None else 0.5 * max_stable_lr(data, idx)
        fit = convex_gd(data, idx, args.steps, lr)
    storage.save_frame(fit.coeffs.to_frame(), "canonical_coeffs.csv")
    values, residue = partial_sum_components(fit.coeffs, data.X)
    payload = fit.to_dict("canonical_coeffs.csv")
    payload["max_abs_residual"] = float(abs(values - data.y).max())
    payload["max_imag_residue"] = float(abs(residue).max())
    if fit.loss_history:
        storage.save_frame(
            pd.DataFrame({"step": range(len(fit.loss_history)), "loss": fit.loss_history}),
            "loss_history.csv",
        )
    storage.save_json(payload, "fit.json")
    logger.info(f"{fit.solver}: Q = {fit.final_loss:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="canonlab",
        description="Literal vs canonical model space experiments for small networks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # End-to-end run of a bundled config
  canonlab run --config configs/smoke.json

  # Rank census over 100 initializations
  canonlab census --config configs/census.json --seeds 100

  # Fourier coefficients and disparity rank of a stored network
  canonlab fourier --net runs/smoke/final_network.json --n 8
  canonlab rank --net runs/smoke/final_network.json --n 4

  # Fit a stored training set in the canonical space
  canonlab solve --data runs/smoke/data.csv --n 4 --solver gd --steps 5000
        """,
    )
    parser.add_argument("--log-level", default=None, help="Override CANONLAB_LOG_LEVEL")
    parser.add_argument("--log-file", default=None, help="Override CANONLAB_LOG_FILE")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run an experiment config end to end")
    run.add_argument("--config", required=True, help="Experiment config (JSON or YAML)")
    run.add_argument("--output-dir", help="Override the config's output_dir")
    run.set_defaults(handler=cmd_run)

    census = sub.add_parser("census", help="Disparity rank census over random initializations")
    census.add_argument("--config", required=True, help="Experiment config (JSON or YAML)")
    census.add_argument("--seeds", type=int, required=True, help="Number of seeds")
    census.add_argument("--workers", type=int, default=None, help="Override CANONLAB_WORKERS")
    census.add_argument("--output-dir", help="Override the config's output_dir")
    census.set_defaults(handler=cmd_census)

    for name, handler, help_text in (
        ("fourier", cmd_fourier, "Fourier coefficients and decay profile of a stored network"),
        ("rank", cmd_rank, "Disparity matrix and numerical rank of a stored network"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--net", required=True, help="Network JSON document")
        cmd.add_argument("--n", type=int_list, required=True, help="Per-dimension limits N_1,...,N_K")
        cmd.add_argument("--grid", type=int_list, help="Grid points per dimension (default 4N+4)")
        cmd.add_argument("--output-dir", help="Output directory")
        cmd.set_defaults(handler=handler)
        if name == "rank":
            cmd.add_argument("--rel-tol", type=float, default=1e-10, help="Relative rank tolerance")

    solve = sub.add_parser("solve", help="Fit a stored training set in the canonical space")
    solve.add_argument("--data", required=True, help="Training set CSV (x_1..x_K, y)")
    solve.add_argument("--n", type=int_list, required=True, help="Per-dimension limits N_1,...,N_K")
    solve.add_argument("--solver", choices=["direct", "gd"], default="direct")
    solve.add_argument("--steps", type=int, default=1000, help="Gradient descent steps")
    solve.add_argument("--lr", type=float, default=None, help="Step size (default half of 1/L)")
    solve.add_argument("--output-dir", help="Output directory")
    solve.set_defaults(handler=cmd_solve, grid=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logger(
        "canonlab",
        log_level=args.log_level or settings.config.log_level,
        log_file=args.log_file if args.log_file is not None else settings.config.log_file,
    )

    try:
        return args.handler(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except CanonlabError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
