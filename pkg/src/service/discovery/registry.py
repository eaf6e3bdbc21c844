"""
Algorithm registry used by the benchmark harness.

Every entry maps (data, benchmark config, run index, rng) to a DAG over the
data columns. External results can be registered as imported graphs.
"""

import logging
from pathlib import Path
from typing import Callable, Optional

import networkx as nx
import numpy as np

from src.core.exceptions import ExtensionError, InputError
from src.model.dataset import DatasetTable
from src.model.graph import Cpdag, LayeredDag, find_cycle
from src.repository.graph_store import GraphRepository
from src.schema.config import BenchmarkConfig
from src.service.discovery.lingam import direct_lingam
from src.service.discovery.notears import notears_linear
from src.service.discovery.pc import pc_stable
from src.service.discovery.sortnregress import sortnregress
from src.service.graph import dag_from_cpdag

logger = logging.getLogger(__name__)

Algorithm = Callable[[DatasetTable, BenchmarkConfig, int, np.random.Generator], LayeredDag]


def orient_randomly(cpdag: Cpdag, rng: np.random.Generator) -> LayeredDag:
    """
    Fallback orientation: keep the directed edges (dropping one edge per
    directed cycle), then orient undirected edges along a random
    topological order.
    """
    directed = set(cpdag.directed)
    while True:
        cycle = find_cycle(cpdag.nodes, directed)
        if not cycle:
            break
        dropped = min(zip(cycle, cycle[1:] + cycle[:1]))
        logger.warning(f"Dropping {dropped} to break a directed cycle in the PC output")
        directed.discard(dropped)

    rank = {str(node): r for r, node in enumerate(rng.permutation(list(cpdag.nodes)))}
    graph = nx.DiGraph()
    graph.add_nodes_from(cpdag.nodes)
    graph.add_edges_from(directed)
    order = list(nx.lexicographical_topological_sort(graph, key=rank.__getitem__))
    position = {node: i for i, node in enumerate(order)}
    edges = set(directed)
    for pair in cpdag.undirected:
        a, b = sorted(pair, key=position.__getitem__)
        edges.add((a, b))
    return LayeredDag.flat(cpdag.nodes, edges)


def _run_pc(data, config, run, rng) -> LayeredDag:
    cpdag = pc_stable(data, config.pc)
    try:
        return dag_from_cpdag(cpdag, rng)
    except ExtensionError as exc:
        logger.warning(f"PC output is not extendable ({exc}); orienting by a random order")
        return orient_randomly(cpdag, rng)


def _run_lingam(data, config, run, rng) -> LayeredDag:
    return direct_lingam(data, config.lingam)


def _run_notears(data, config, run, rng) -> LayeredDag:
    return notears_linear(data, config.notears).to_dag()


def _run_snr(data, config, run, rng) -> LayeredDag:
    return sortnregress(data, config.snr)


class ImportedGraphs:
    """
    Graphs learned by an external tool: one graph JSON file used for every
    run, or a directory holding ``run_<i>.json`` per run.
    """

    def __init__(self, path: str):
        self.path = Path(path)
        if not self.path.exists():
            raise InputError(f"Imported graph path does not exist: {path}")
        self.repository = GraphRepository()

    def __call__(self, data, config, run, rng) -> LayeredDag:
        if self.path.is_dir():
            source = self.path / f"run_{run}.json"
            if not source.exists():
                raise InputError(f"{self.path} has no result for run {run}")
        else:
            source = self.path
        dag = self.repository.load_dag(source)
        if set(dag.nodes) != set(data.columns):
            raise InputError(f"{source} does not cover the benchmark columns")
        return LayeredDag.flat(data.columns, dag.edges)


class AlgorithmRegistry:
    def __init__(self):
        self._algorithms: dict[str, Algorithm] = {}

    def register(self, key: str, algorithm: Algorithm) -> None:
        if key in self._algorithms:
            raise InputError(f"Algorithm key already registered: {key}")
        self._algorithms[key] = algorithm

    def register_import(self, key: str, path: str) -> None:
        self.register(key, ImportedGraphs(path))

    def keys(self) -> list[str]:
        return sorted(self._algorithms)

    def get(self, key: str) -> Algorithm:
        try:
            return self._algorithms[key]
        except KeyError:
            raise InputError(
                f"Unknown algorithm '{key}'. Available: {', '.join(self.keys())}"
            ) from None

    def __contains__(self, key: str) -> bool:
        return key in self._algorithms


def default_registry(imports: Optional[dict[str, str]] = None) -> AlgorithmRegistry:
    registry = AlgorithmRegistry()
    registry.register("pc", _run_pc)
    registry.register("lingam", _run_lingam)
    registry.register("notears", _run_notears)
    registry.register("snr", _run_snr)
    for key, path in sorted((imports or {}).items()):
        registry.register_import(key, path)
    return registry
