"""Per-step training records."""

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Union

import pandas as pd

from src.constants import FLOAT_FORMAT, TRACE_COLUMNS
from src.exceptions import PreconditionError


@dataclass
class TraceRow:
    step: int
    epoch: int
    minibatch_loss: Optional[float]
    # Norm of the minibatch gradient used for the update; empty on the closing row.
    grad_norm_literal: Optional[float]
    full_loss: Optional[float] = None
    full_grad_norm: Optional[float] = None
    grad_norm_canonical: Optional[float] = None
    rank: Optional[int] = None
    sigma_ratio: Optional[float] = None
    chain_residual: Optional[float] = None
    disparity_norm: Optional[float] = None
    dead_neurons: Optional[int] = None
    duplicated_pairs: Optional[int] = None

    @property
    def monitored(self) -> bool:
        return self.full_loss is not None


class TrainingTrace:
    """Rows with strictly increasing steps."""

    def __init__(self, rows: Optional[List[TraceRow]] = None):
        self.rows: List[TraceRow] = []
        for row in rows or []:
            self.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[TraceRow]:
        return iter(self.rows)

    def append(self, row: TraceRow) -> None:
        if self.rows and row.step <= self.rows[-1].step:
            raise PreconditionError(
                f"Trace steps must increase: {row.step} after {self.rows[-1].step}"
            )
        self.rows.append(row)

    def monitored_rows(self) -> List[TraceRow]:
        return [row for row in self.rows if row.monitored]

    def ranked_rows(self) -> List[TraceRow]:
        return [row for row in self.rows if row.rank is not None]

    @property
    def final_full_loss(self) -> Optional[float]:
        monitored = self.monitored_rows()
        return monitored[-1].full_loss if monitored else None

    @property
    def final_rank(self) -> Optional[int]:
        ranked = self.ranked_rows()
        return ranked[-1].rank if ranked else None

    def degeneracy_summary(self) -> Dict[str, Optional[int]]:
        """Dead and duplicated counts at the first and last monitored step, and how many appeared."""
        tracked = [row for row in self.rows if row.dead_neurons is not None]
        if not tracked:
            return {
                "initial_dead": None,
                "final_dead": None,
                "new_dead": None,
                "initial_duplicated": None,
                "final_duplicated": None,
                "new_duplicated": None,
            }
        first, last = tracked[0], tracked[-1]
        return {
            "initial_dead": first.dead_neurons,
            "final_dead": last.dead_neurons,
            "new_dead": max(0, last.dead_neurons - first.dead_neurons),
            "initial_duplicated": first.duplicated_pairs,
            "final_duplicated": last.duplicated_pairs,
            "new_duplicated": max(0, last.duplicated_pairs - first.duplicated_pairs),
        }

    def to_frame(self, extended: bool = False) -> pd.DataFrame:
        """
        Trace table with the CSV columns; ``extended`` appends the full-batch gradient
        norm, the disparity norm and degeneracy counts.
        """
        columns = list(TRACE_COLUMNS)
        if extended:
            columns += ["full_grad_norm", "disparity_norm", "dead_neurons", "duplicated_pairs"]
        df = pd.DataFrame([asdict(row) for row in self.rows], columns=columns)
        for column in ("step", "epoch", "rank", "dead_neurons", "duplicated_pairs"):
            if column in df:
                df[column] = df[column].astype("Int64")
        for column in df.columns:
            if str(df[column].dtype) != "Int64":
                df[column] = df[column].astype("float64")
        return df

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Unmonitored fields are written empty."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")
        return path
