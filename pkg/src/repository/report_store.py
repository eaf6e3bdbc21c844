import logging
from pathlib import Path

import pandas as pd

from src.schema.report import BenchmarkReport, FidelityReport
from .base import JsonDocumentRepository, PathLike

logger = logging.getLogger(__name__)


class BenchmarkReportRepository(JsonDocumentRepository[BenchmarkReport]):
    def __init__(self):
        super().__init__(BenchmarkReport)

    def write_table(self, path: PathLike, table: pd.DataFrame) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        logger.info(f"Wrote {path} ({len(table)} rows)")
        return path


class FidelityReportRepository(JsonDocumentRepository[FidelityReport]):
    def __init__(self):
        super().__init__(FidelityReport)
