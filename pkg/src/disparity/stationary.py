"""Classification of (near-)stationary points by the rank of H(w)."""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np

from src.constants import RANK_REL_TOL
from src.disparity.gradients import canonical_gradient_at_network
from src.disparity.matrix import DisparityMatrix
from src.disparity.rank import RankReport, numerical_rank
from src.exceptions import PreconditionError
from src.nn_core.dataset import TrainingSet
from src.nn_core.loss import loss_and_grad
from src.nn_core.network import MlpNetwork

CERTIFICATE_LOSS_FACTOR = 10.0


class Verdict(str, Enum):
    GLOBAL_MINIMUM_CERTIFICATE = "global_minimum_certificate"
    NOT_STATIONARY = "not_stationary"
    INDETERMINATE_RANK_DEFICIENT = "indeterminate_rank_deficient"
    NON_GLOBAL_STATIONARY = "non_global_stationary"


@dataclass(frozen=True)
class StationaryClassification:
    literal_grad_norm: float
    canonical_grad_norm: float
    rank_report: RankReport
    verdict: Verdict
    loss: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "literal_grad_norm": self.literal_grad_norm,
            "canonical_grad_norm": self.canonical_grad_norm,
            "numerical_rank": self.rank_report.numerical_rank,
            "n_columns": self.rank_report.n_columns,
            "sigma_min_over_sigma_max": self.rank_report.sigma_min_over_sigma_max,
            "loss": self.loss,
        }


def decide(
    literal_norm: float, canonical_norm: float, full_rank: bool, grad_tol: float, loss: float
) -> Verdict:
    """
    A stationary point is global when H is full rank or the canonical gradient vanishes.

    No certificate is issued while the loss exceeds CERTIFICATE_LOSS_FACTOR * grad_tol;
    such points are indeterminate.
    """
    if not literal_norm <= grad_tol:
        return Verdict.NOT_STATIONARY
    if not full_rank and canonical_norm > grad_tol:
        return Verdict.NON_GLOBAL_STATIONARY
    certified = full_rank or canonical_norm <= grad_tol
    if certified and loss <= CERTIFICATE_LOSS_FACTOR * grad_tol:
        return Verdict.GLOBAL_MINIMUM_CERTIFICATE
    # NaN canonical norm, or a certificate contradicted by the loss
    return Verdict.INDETERMINATE_RANK_DEFICIENT


def classify_stationary_point(
    net: MlpNetwork,
    data: TrainingSet,
    H: DisparityMatrix,
    grad_tol: float,
    rank_tol: float = RANK_REL_TOL,
    loss: str = "mse",
) -> StationaryClassification:
    """
    Classify w using the literal gradient norm, the rank of H(w) and the canonical
    gradient norm.

    Raises:
        PreconditionError: If a tolerance is not positive
    """
    if grad_tol <= 0 or rank_tol <= 0:
        raise PreconditionError("grad_tol and rank_tol must be positive")
    if H.architecture != net.architecture:
        raise PreconditionError("Disparity matrix was built for a different architecture")

    Q, g_lit = loss_and_grad(net, data, loss)
    literal_norm = float(np.linalg.norm(g_lit[H.weight_indices]))
    g_can = canonical_gradient_at_network(net, data, H.index_set, loss)
    canonical_norm = float(np.linalg.norm(g_can))
    report = numerical_rank(H, rank_tol)

    verdict = decide(literal_norm, canonical_norm, report.is_full_rank, grad_tol, Q)
    return StationaryClassification(literal_norm, canonical_norm, report, verdict, Q)
