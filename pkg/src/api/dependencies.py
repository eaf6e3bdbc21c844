"""Shared loaders and argument helpers for the command modules."""

import argparse
import logging
from pathlib import Path
from typing import Any, Optional, Type, TypeVar

from pydantic import BaseModel, ValidationError

from src.core.exceptions import InputError, SchemaError
from src.model.dataset import DatasetTable
from src.repository.base import JsonDocumentRepository
from src.repository.dataset_store import DatasetRepository
from src.repository.graph_store import CrossEdgeRepository, GraphRepository
from src.repository.model_store import ModelRepository
from src.repository.report_store import BenchmarkReportRepository, FidelityReportRepository

logger = logging.getLogger(__name__)

C = TypeVar("C", bound=BaseModel)

datasets = DatasetRepository()
graphs = GraphRepository()
cross_edges = CrossEdgeRepository()
models = ModelRepository()
benchmark_reports = BenchmarkReportRepository()
fidelity_reports = FidelityReportRepository()


def load_config(path: Optional[str], model: Type[C], **overrides: Any) -> C:
    """
    Config from an optional JSON file, with command-line ``overrides``
    (``None`` values are ignored) applied on top and validated.
    """
    base = JsonDocumentRepository(model).read(path) if path else model()
    return apply_overrides(base, **overrides)


def apply_overrides(config: C, **overrides: Any) -> C:
    updates = {k: v for k, v in overrides.items() if v is not None}
    if not updates:
        return config
    try:
        return type(config).model_validate({**config.model_dump(), **updates})
    except ValidationError as exc:
        raise SchemaError(f"Invalid {type(config).__name__}: {exc}") from exc


def load_table(path: str) -> DatasetTable:
    if not Path(path).exists():
        raise InputError(f"Data file does not exist: {path}")
    return datasets.read(path)


def sibling(path: str, suffix: str) -> Path:
    """``path`` with ``suffix`` appended to its stem: data.json -> data_summary.csv."""
    p = Path(path)
    return p.with_name(f"{p.stem}{suffix}")


def parse_assignment(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep or not name or not value:
        raise argparse.ArgumentTypeError(f"Expected NAME=PATH, got '{text}'")
    return name, value


def parse_keys(text: str) -> list[str]:
    return [key.strip() for key in text.split(",") if key.strip()]


def add_seed(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="Master seed for all randomness")
