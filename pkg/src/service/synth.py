"""
Semisynthetic data generation along a known DAG.

Every node gets its own conditional model: sources are resampled by a
smooth bootstrap, all other nodes by a distributional forest over their
parents. Rows are generated one at a time along a causal order, so the
synthetic distribution factorizes over the DAG.
"""

import hashlib
import logging
from typing import Iterable, Optional

import numpy as np

from src import __version__
from src.core.exceptions import DegenerateResponseError, FingerprintMismatchError, InputError
from src.model.dataset import DatasetTable
from src.model.drf import DistributionalForest, TreeArrays
from src.model.graph import Edge, LayeredDag, PriorKnowledge
from src.model.pipeline import PipelineModel, SmoothBootstrapSpec
from src.repository.graph_store import dag_to_document
from src.schema.config import DrfConfig, PipelineConfig
from src.schema.report import FidelityReport, FidelitySummary, NodeFidelity
from src.service.drf import conditional_sample, fit_drf, silverman_bandwidth
from src.service.graph import causal_order, merge_ground_truth
from src.utils.seeding import child_seed

logger = logging.getLogger(__name__)


def graph_fingerprint(dag: LayeredDag) -> str:
    """Hash of the DAG's node layering and edge set."""
    payload = dag_to_document(dag).model_dump_json().encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


def check_graph(model: PipelineModel, dag: LayeredDag) -> None:
    expected = model.fit_meta.get("graph_fingerprint")
    found = graph_fingerprint(dag)
    if expected != found:
        raise FingerprintMismatchError(
            f"Model was fit on graph {str(expected)[:12]}, requested graph is {found[:12]}"
        )


def smooth_bootstrap_spec(column: np.ndarray) -> SmoothBootstrapSpec:
    return SmoothBootstrapSpec(column, silverman_bandwidth(column))


def smooth_bootstrap_draw(spec: SmoothBootstrapSpec, rng: np.random.Generator) -> float:
    """Uniform pick of a training value plus Gaussian jitter clipped at 5 bandwidths."""
    values = spec.training_column
    value = float(values[rng.integers(values.size)])
    if spec.bandwidth > 0:
        limit = 5 * spec.bandwidth
        value += float(np.clip(rng.normal(0.0, spec.bandwidth), -limit, limit))
    return value


def _constant_forest(
    target: str, parents: tuple[str, ...], column: np.ndarray, config: DrfConfig
) -> DistributionalForest:
    rows = np.arange(column.size)
    return DistributionalForest.assemble(
        target, parents, column, [TreeArrays.single_leaf(rows)], 1.0, config
    )


def fit_pipeline(
    data: DatasetTable,
    dag: LayeredDag,
    config: PipelineConfig = PipelineConfig(),
    workers: Optional[int] = None,
) -> PipelineModel:
    """Fit one conditional per node of ``dag`` on the matching columns of ``data``."""
    data.require(dag.nodes)
    order = causal_order(dag)
    sources: dict[str, SmoothBootstrapSpec] = {}
    forests: dict[str, DistributionalForest] = {}
    logger.info(
        f"Fitting pipeline on {len(dag.nodes)} nodes "
        f"({len(dag.edges)} edges, {data.num_rows} rows)"
    )
    for node in order:
        column = data.column(node)
        parents = dag.parents[node]
        if not parents:
            sources[node] = smooth_bootstrap_spec(column)
            continue
        drf_config = config.drf.model_copy(
            update={"seed": child_seed(config.seed, dag.index[node])}
        )
        try:
            forests[node] = fit_drf(
                column, data, drf_config, target=node, predictors=parents, workers=workers
            )
        except DegenerateResponseError:
            logger.warning(f"{node} is constant; its conditional is a point mass")
            forests[node] = _constant_forest(node, parents, column, drf_config)

    fit_meta = {
        "seed": config.seed,
        "data_fingerprint": data.select(list(dag.nodes)).fingerprint(),
        "graph_fingerprint": graph_fingerprint(dag),
        "config": config.model_dump(mode="json"),
        "rows": data.num_rows,
        "version": __version__,
    }
    logger.info(f"Fitted {len(sources)} source specs and {len(forests)} forests")
    return PipelineModel(dag, tuple(order), sources, forests, fit_meta)


def sample(model: PipelineModel, n: int, rng: np.random.Generator) -> DatasetTable:
    """
    Draw ``n`` rows. Each row is completed along the causal order before the
    next row starts, so the rng stream is consumed in a fixed order.
    """
    if n < 1:
        raise InputError(f"Sample size must be at least 1, got {n}")
    position = model.dag.index
    steps = []
    for node in model.order:
        if node in model.source_specs:
            steps.append((position[node], model.source_specs[node], None))
        else:
            forest = model.conditionals[node]
            inputs = np.array([position[p] for p in forest.predictors])
            steps.append((position[node], forest, inputs))

    values = np.empty((n, len(model.dag.nodes)))
    for row in values:
        for column, law, inputs in steps:
            if inputs is None:
                row[column] = smooth_bootstrap_draw(law, rng)
            else:
                row[column] = conditional_sample(law, row[inputs], rng)
    return DatasetTable(model.dag.nodes, values)


def cell_graphs(prior: PriorKnowledge, cross_edges: Iterable[Edge]) -> dict[int, LayeredDag]:
    """Ground-truth graph of every station: the induced subgraph of the merged truth."""
    truth = merge_ground_truth(prior, cross_edges)
    return {s: truth.restrict(truth.station_nodes(s)) for s in truth.stations}


def fit_cell_pipelines(
    data: DatasetTable,
    prior: PriorKnowledge,
    config: PipelineConfig = PipelineConfig(),
    cross_edges: Iterable[Edge] = (),
    workers: Optional[int] = None,
) -> dict[int, PipelineModel]:
    """
    Independent pipeline per station. Edges entering a station from earlier
    stations are dropped, so each cell model marginalizes over upstream cells.
    """
    models = {}
    for station, dag in cell_graphs(prior, cross_edges).items():
        logger.info(f"Fitting station {station} ({len(dag.nodes)} nodes)")
        cell_config = config.model_copy(update={"seed": child_seed(config.seed, station)})
        models[station] = fit_pipeline(data, dag, cell_config, workers)
    return models


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov distance between empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise InputError("KS statistic needs two non-empty samples")
    points = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, points, side="right") / a.size
    cdf_b = np.searchsorted(b, points, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def fidelity_report(
    original: DatasetTable, model: PipelineModel, n: int, rng: np.random.Generator
) -> FidelityReport:
    original.require(model.dag.nodes)
    synthetic = sample(model, n, rng)
    entries = [
        NodeFidelity(
            node=node,
            ks=ks_statistic(original.column(node), synthetic.column(node)),
            is_source=node in model.source_specs,
        )
        for node in model.dag.nodes
    ]
    entries.sort(key=lambda e: (-e.ks, model.dag.index[e.node]))

    scores = [e.ks for e in entries if not e.is_source]
    summary = FidelitySummary(num_nodes=len(scores))
    if scores:
        summary = FidelitySummary(
            num_nodes=len(scores),
            max=max(scores),
            min=min(scores),
            mean=float(np.mean(scores)),
        )
    return FidelityReport(rows=n, nodes=entries, non_source=summary)
