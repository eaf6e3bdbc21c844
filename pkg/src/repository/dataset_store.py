import logging
from pathlib import Path

import pandas as pd

from src.core.exceptions import InputError
from src.model.dataset import DatasetTable
from .base import PathLike

logger = logging.getLogger(__name__)


class DatasetRepository:
    """CSV persistence for numeric tables (header row, dot decimals)."""

    FLOAT_FORMAT = "%.17g"

    def read(self, path: PathLike) -> DatasetTable:
        path = Path(path)
        try:
            frame = pd.read_csv(path, float_precision="round_trip")
        except pd.errors.EmptyDataError as exc:
            raise InputError(f"{path} is empty") from exc
        except pd.errors.ParserError as exc:
            raise InputError(f"{path} is not a valid CSV file: {exc}") from exc
        if frame.isna().any().any():
            missing = [str(c) for c in frame.columns[frame.isna().any()]]
            raise InputError(f"{path} has missing values in columns: {', '.join(missing)}")
        try:
            table = DatasetTable.from_frame(frame)
        except InputError as exc:
            raise InputError(f"{path}: {exc}") from exc
        logger.info(f"Loaded {path} ({table.num_rows} rows, {len(table.columns)} columns)")
        return table

    def write(self, path: PathLike, table: DatasetTable) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        table.to_frame().to_csv(
            path, index=False, float_format=self.FLOAT_FORMAT, lineterminator="\n"
        )
        logger.info(f"Wrote {path} ({table.num_rows} rows)")
        return path
