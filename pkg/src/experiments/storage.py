"""Artifact storage for experiment outputs."""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Optional, Union

import matplotlib
import pandas as pd

from src.config.settings import settings
from src.constants import FLOAT_FORMAT
from src.utils.logger import get_logger

logger = get_logger(__name__)


class ArtifactStorage:
    """Writes CSV, JSON and SVG artifacts below one run directory, each file atomically."""

    def __init__(self, root: Union[str, Path], export_parquet: Optional[bool] = None):
        """
        Initialize storage.

        Args:
            root: Run directory, created on demand
            export_parquet: Also write Parquet copies of tables; defaults to the
                CANONLAB_EXPORT_PARQUET setting
        """
        self.root = Path(root)
        self.export_parquet = (
            settings.config.export_parquet if export_parquet is None else export_parquet
        )

    def path_for(self, name: str) -> Path:
        return self.root / name

    def _atomic_write(self, name: str, writer: Callable[[Path], None]) -> Path:
        target = self.path_for(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
        os.close(fd)
        tmp = Path(tmp_name)
        try:
            writer(tmp)
            os.replace(tmp, target)
        except Exception as e:
            logger.error(f"Error writing {target}: {e}")
            tmp.unlink(missing_ok=True)
            raise
        return target

    def save_frame(self, df: pd.DataFrame, name: str) -> Path:
        """
        Save a table as CSV with full float precision; unset values are written empty.

        Args:
            df: Table
            name: File name relative to the run directory

        Returns:
            Path of the written file
        """
        path = self._atomic_write(
            name, lambda tmp: df.to_csv(tmp, index=False, float_format=FLOAT_FORMAT, na_rep="")
        )
        logger.info(f"Wrote {len(df)} rows to {path}")
        if self.export_parquet:
            self.export_to_parquet(df, Path(name).with_suffix(".parquet").as_posix())
        return path

    def save_json(self, payload: Any, name: str) -> Path:
        def write(tmp: Path) -> None:
            with open(tmp, "w") as f:
                json.dump(payload, f, indent=2, sort_keys=False)
                f.write("\n")

        path = self._atomic_write(name, write)
        logger.info(f"Wrote {path}")
        return path

    def save_text(self, text: str, name: str) -> Path:
        def write(tmp: Path) -> None:
            with open(tmp, "w") as f:
                f.write(text)

        return self._atomic_write(name, write)

    def save_figure(self, figure, name: str) -> Path:
        """Save a matplotlib figure as SVG."""
        def write(tmp: Path) -> None:
            with matplotlib.rc_context({"svg.hashsalt": "canonlab"}):
                figure.savefig(tmp, format="svg", metadata={"Date": None})

        path = self._atomic_write(name, write)
        logger.info(f"Wrote plot {path}")
        return path

    def export_to_parquet(self, df: pd.DataFrame, name: str) -> Path:
        """
        Export a table to Parquet through pyarrow.

        Args:
            df: Table
            name: File name relative to the run directory

        Returns:
            Path of the written file
        """
        path = self._atomic_write(name, lambda tmp: df.to_parquet(tmp, engine="pyarrow", index=False))
        logger.info(f"Exported {len(df)} rows to {path}")
        return path
