"""
Reference assembly line: a seeded stand-in for plant data.

Stations hold consecutive processes, processes hold measurement nodes, and
every edge points forward along the line. Node values follow additive
structural equations; a fraction of nodes also gets a "known mechanism"
prediction column built from the exact within-process part of its equation.
"""

import logging
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import BSpline

from src.model.dataset import DatasetTable
from src.model.graph import Edge, LayeredDag, MechanismSpec, PriorKnowledge
from src.schema.config import LineConfig
from src.service.graph import causal_order
from src.utils.seeding import child_rng

logger = logging.getLogger(__name__)

PREDICTION_PREFIX = "pred__"

_STRUCTURE_STREAM = 0
_MECHANISM_STREAM = 1
_NOISE_STREAM = 2

# random spline mechanisms live on standardized inputs clipped to this range
_SPLINE_RANGE = 3.0
_SPLINE_BASIS = 6
_SPLINE_DEGREE = 3

Transform = Callable[[np.ndarray], np.ndarray]


class ReferenceLine(NamedTuple):
    truth: LayeredDag
    prior: PriorKnowledge
    data: DatasetTable
    predictions: DatasetTable


class Fixture(NamedTuple):
    truth: LayeredDag
    prior: PriorKnowledge
    sample: Callable[[int, int], DatasetTable]


def prediction_column(node: str) -> str:
    return f"{PREDICTION_PREFIX}{node}"


def line_topology(config: LineConfig) -> list[tuple[int, int, list[str]]]:
    """``(process index, station, nodes)`` for every process of the line."""
    processes = []
    index = 1
    for station, count in enumerate(config.station_node_counts, start=1):
        chunks = np.array_split(np.arange(count), config.processes_per_station)
        offset = 0
        for local, chunk in enumerate(chunks, start=1):
            names = [
                f"Station{station}_Process{local}_m{offset + j + 1:02d}" for j in range(len(chunk))
            ]
            offset += len(chunk)
            processes.append((index, station, names))
            index += 1
    return processes


def _random_edges(
    processes: list[tuple[int, int, list[str]]], config: LineConfig, rng: np.random.Generator
) -> set[Edge]:
    edges: set[Edge] = set()
    for _, _, nodes in processes:
        for i, u in enumerate(nodes):
            for v in nodes[i + 1 :]:
                if rng.random() < config.within_process_edge_density:
                    edges.add((u, v))
    for a, (_, _, earlier) in enumerate(processes):
        for _, _, later in processes[a + 1 :]:
            for u in earlier:
                for v in later:
                    if rng.random() < config.cross_edge_density:
                        edges.add((u, v))
    return edges


def _spline_transform(rng: np.random.Generator) -> Transform:
    interior = np.linspace(-_SPLINE_RANGE, _SPLINE_RANGE, _SPLINE_BASIS - _SPLINE_DEGREE + 1)
    knots = np.concatenate(
        [np.repeat(interior[0], _SPLINE_DEGREE), interior, np.repeat(interior[-1], _SPLINE_DEGREE)]
    )
    spline = BSpline(knots, rng.normal(0.0, 1.0, _SPLINE_BASIS), _SPLINE_DEGREE)
    return lambda z: spline(np.clip(z, -_SPLINE_RANGE, _SPLINE_RANGE))


def _edge_transform(family: str, rng: np.random.Generator) -> Transform:
    if family == "mixed":
        family = "linear" if rng.random() < 0.5 else "spline-nonlinear"
    if family == "linear":
        return lambda z: z
    return _spline_transform(rng)


def _noise(family: str, n: int, rng: np.random.Generator) -> np.ndarray:
    if family == "mixed":
        family = "gaussian" if rng.random() < 0.5 else "uniform"
    scale = rng.uniform(0.5, 1.0)
    if family == "gaussian":
        return rng.normal(0.0, scale, n)
    # uniform on [-a, a] with standard deviation ``scale``
    half_width = scale * np.sqrt(3.0)
    return rng.uniform(-half_width, half_width, n)


def _standardize(column: np.ndarray) -> np.ndarray:
    sd = column.std()
    return (column - column.mean()) / sd if sd > 0 else column - column.mean()


def generate_line(config: LineConfig = LineConfig()) -> ReferenceLine:
    """Sample a layered DAG, its prior knowledge and ``config.rows`` rows of data."""
    structure_rng = child_rng(config.seed, _STRUCTURE_STREAM)
    mechanism_rng = child_rng(config.seed, _MECHANISM_STREAM)
    noise_rng = child_rng(config.seed, _NOISE_STREAM)

    processes = line_topology(config)
    truth = LayeredDag.from_processes(processes, _random_edges(processes, config, structure_rng))

    # one weight and transform per edge, drawn in a fixed edge order
    order = causal_order(truth)
    terms: dict[str, list[tuple[str, float, Transform]]] = {}
    for node in order:
        terms[node] = []
        for parent in truth.parents[node]:
            weight = mechanism_rng.uniform(0.5, 1.5) * mechanism_rng.choice([-1.0, 1.0])
            transform = _edge_transform(config.mechanism_family, mechanism_rng)
            terms[node].append((parent, weight, transform))

    with_process_parents = [
        n for n in order if any(truth.process_of[p] == truth.process_of[n] for p in truth.parents[n])
    ]
    num_mechanisms = int(round(config.mechanism_fraction * len(with_process_parents)))
    picked = mechanism_rng.choice(len(with_process_parents), size=num_mechanisms, replace=False)
    mechanism_nodes = sorted((with_process_parents[i] for i in picked), key=truth.index.__getitem__)

    n = config.rows
    values: dict[str, np.ndarray] = {}
    standardized: dict[str, np.ndarray] = {}
    predictions: dict[str, np.ndarray] = {}
    for node in order:
        within = np.zeros(n)
        across = np.zeros(n)
        for parent, weight, transform in terms[node]:
            contribution = weight * transform(standardized[parent])
            if truth.process_of[parent] == truth.process_of[node]:
                within += contribution
            else:
                across += contribution
        values[node] = within + across + _noise(config.noise_family, n, noise_rng)
        standardized[node] = _standardize(values[node])
        if node in mechanism_nodes:
            predictions[prediction_column(node)] = within

    mechanisms = {
        node: MechanismSpec(
            node,
            tuple(p for p in truth.parents[node] if truth.process_of[p] == truth.process_of[node]),
            prediction_column(node),
        )
        for node in mechanism_nodes
    }
    prior, cross_edges = PriorKnowledge.from_dag(truth, mechanisms)
    data = DatasetTable(truth.nodes, np.column_stack([values[v] for v in truth.nodes]))
    prediction_names = [prediction_column(v) for v in mechanism_nodes]
    prediction_table = DatasetTable(
        tuple(prediction_names),
        np.column_stack([predictions[c] for c in prediction_names])
        if prediction_names
        else np.zeros((n, 0)),
    )
    logger.info(
        f"Generated line with {len(truth.nodes)} nodes, "
        f"{len(truth.within_process_edges)} within-process and {len(cross_edges)} "
        f"cross-process edges, {n} rows"
    )
    return ReferenceLine(truth, prior, data, prediction_table)


def toy_line_fixture() -> Fixture:
    """
    Six-node, two-process toy line. Process 1 is the chain 1 -> 2 -> 3,
    process 2 holds 5 -> 6 with node 4 isolated, and the cross-process
    edges are 2 -> 4 and 3 -> 5.
    """
    truth = LayeredDag.from_processes(
        [(1, 1, ["1", "2", "3"]), (2, 1, ["4", "5", "6"])],
        [("1", "2"), ("2", "3"), ("5", "6"), ("2", "4"), ("3", "5")],
    )
    prior, _ = PriorKnowledge.from_dag(truth)

    def sample(n: int, seed: int = 0) -> DatasetTable:
        rng = child_rng(seed)
        noise = rng.normal(0.0, 0.5, size=(n, 5))
        x1 = rng.normal(0.0, 1.0, n)
        x2 = 1.2 * np.tanh(x1) + noise[:, 0]
        x3 = np.sin(1.5 * x2) + noise[:, 1]
        x4 = x2**2 - np.mean(x2**2) + noise[:, 2]
        x5 = 2.0 * np.tanh(x3) + noise[:, 3]
        x6 = x5 + 0.5 * np.sin(2.0 * x5) + noise[:, 4]
        return DatasetTable(truth.nodes, np.column_stack([x1, x2, x3, x4, x5, x6]))

    return Fixture(truth, prior, sample)
