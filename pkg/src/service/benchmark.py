"""
Causal-discovery benchmark on semisynthetic data.

Each run samples a fresh dataset from a fitted pipeline, optionally
z-scores it with its own statistics, runs every algorithm and scores the
result against the true DAG. An empty graph is scored alongside as the
reference point an algorithm has to beat.
"""

import logging
import time
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.core.config import settings
from src.core.exceptions import InputError
from src.model.dataset import DatasetTable
from src.model.graph import LayeredDag
from src.model.pipeline import PipelineModel
from src.schema.config import BenchmarkConfig
from src.schema.report import BenchmarkReport, BenchmarkRun
from src.service.discovery.registry import AlgorithmRegistry, default_registry
from src.service.metrics import precision_recall_f1, varsortability
from src.service.synth import sample
from src.utils.seeding import child_rng

logger = logging.getLogger(__name__)

BASELINE = "empty"
METRICS = ("shd", "precision", "recall", "f1")

# seed-sequence stream ids below the benchmark seed
_DATA_STREAM = 0
_ALGORITHM_STREAM = 1


def _run_cell(
    registry: AlgorithmRegistry,
    key: str,
    key_index: int,
    run: int,
    data: DatasetTable,
    truth: LayeredDag,
    config: BenchmarkConfig,
    data_varsortability: float,
) -> BenchmarkRun:
    rng = child_rng(config.seed, _ALGORITHM_STREAM, run, key_index)
    started = time.perf_counter()
    if key == BASELINE:
        learned = LayeredDag.flat(data.columns)
    else:
        learned = registry.get(key)(data, config, run, rng)
    elapsed = time.perf_counter() - started
    return BenchmarkRun(
        algorithm=key,
        run=run,
        seed=config.seed,
        n=data.num_rows,
        standardized=config.standardize,
        score=precision_recall_f1(truth, LayeredDag.flat(truth.nodes, learned.edges)),
        varsortability=None if np.isnan(data_varsortability) else data_varsortability,
        wall_time_seconds=elapsed,
    )


def run_data(model: PipelineModel, config: BenchmarkConfig, run: int) -> DatasetTable:
    """Dataset seen by every algorithm in ``run``."""
    data = sample(model, config.n, child_rng(config.seed, _DATA_STREAM, run))
    if not config.standardize:
        return data
    constant = data.constant_columns()
    if constant:
        logger.warning(f"Run {run}: constant columns left unscaled: {', '.join(constant)}")
    return data.standardized()


def run_benchmark(
    model: PipelineModel,
    truth: LayeredDag,
    config: BenchmarkConfig = BenchmarkConfig(),
    registry: Optional[AlgorithmRegistry] = None,
    workers: Optional[int] = None,
) -> BenchmarkReport:
    registry = registry or default_registry(config.imports)
    for key in config.algorithms:
        registry.get(key)
    if set(truth.nodes) != set(model.dag.nodes):
        raise InputError("Truth graph and model cover different nodes")

    # datasets are drawn here, in run order, so they do not depend on worker count
    cells = []
    for run in range(config.runs):
        data = run_data(model, config, run)
        score = varsortability(data, truth)
        keys = [*config.algorithms, BASELINE]
        cells.extend((key, index, run, data, score) for index, key in enumerate(keys))
        logger.info(f"Prepared run {run + 1}/{config.runs}")

    rows = Parallel(n_jobs=workers or settings.workers)(
        delayed(_run_cell)(registry, key, index, run, data, truth, config, score)
        for key, index, run, data, score in cells
    )
    logger.info(f"Scored {len(rows)} benchmark cells")
    return BenchmarkReport(runs=list(rows), config=config.model_dump(mode="json"))


def config_from_report(report: BenchmarkReport) -> BenchmarkConfig:
    """Benchmark config echoed in ``report``; invalid echoes raise InputError."""
    try:
        return BenchmarkConfig.model_validate(report.config)
    except ValueError as exc:
        raise InputError(f"Report does not echo a valid benchmark config: {exc}") from exc


def long_table(report: BenchmarkReport) -> pd.DataFrame:
    """One row per (algorithm, run, metric): the values behind metric box plots."""
    records = [
        {
            "algorithm": row.algorithm,
            "run": row.run,
            "metric": metric,
            "value": getattr(row.score, metric),
        }
        for row in report.runs
        for metric in METRICS
    ]
    return pd.DataFrame(records, columns=["algorithm", "run", "metric", "value"])


def summary_table(report: BenchmarkReport) -> pd.DataFrame:
    """Mean, median and standard deviation per algorithm and metric."""
    table = long_table(report)
    summary = (
        table.groupby(["algorithm", "metric"], sort=True)["value"]
        .agg(["mean", "median", "std"])
        .reset_index()
    )
    return summary
