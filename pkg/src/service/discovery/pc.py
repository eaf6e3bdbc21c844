"""
PC-stable structure learning.

The skeleton phase removes edges level by level; at each level the
conditioning candidates come from a snapshot of the adjacencies taken
before any removal at that level, so the result does not depend on the
column order.
"""

import logging
from itertools import combinations
from typing import Callable, Optional, Sequence

from src.core.exceptions import InputError
from src.model.dataset import DatasetTable
from src.model.graph import Cpdag
from src.schema.config import PcConfig
from src.service.discovery.citest import FisherZTest
from src.service.discovery.cpdag import PartialGraph, apply_meek_rules, orient_v_structures

logger = logging.getLogger(__name__)

# (x, y, conditioning set) -> independent?
CiTest = Callable[[str, str, tuple[str, ...]], bool]


def build_skeleton(
    nodes: Sequence[str], ci_test: CiTest, max_cond_size: Optional[int] = None
) -> tuple[dict[str, set[str]], dict[frozenset[str], tuple[str, ...]]]:
    """Stable skeleton search; returns adjacency sets and separating sets."""
    nodes = sorted(nodes)
    adjacency = {x: set(nodes) - {x} for x in nodes}
    separating_sets: dict[frozenset[str], tuple[str, ...]] = {}

    level = 0
    while True:
        snapshot = {x: set(adj) for x, adj in adjacency.items()}
        if all(len(snapshot[x]) - 1 < level for x in nodes):
            break
        for x in nodes:
            for y in sorted(snapshot[x]):
                if y not in adjacency[x]:
                    continue
                candidates = sorted(snapshot[x] - {y})
                if len(candidates) < level:
                    continue
                for cond in combinations(candidates, level):
                    if ci_test(x, y, cond):
                        adjacency[x].discard(y)
                        adjacency[y].discard(x)
                        separating_sets[frozenset((x, y))] = cond
                        break
        remaining = sum(len(a) for a in adjacency.values()) // 2
        logger.debug(f"Skeleton level {level}: {remaining} edges remain")
        if max_cond_size is not None and level >= max_cond_size:
            break
        level += 1
    return adjacency, separating_sets


def pc_from_ci_test(nodes: Sequence[str], ci_test: CiTest, max_cond_size: Optional[int] = None) -> Cpdag:
    """PC-stable driven by an arbitrary independence decision (e.g. a d-separation oracle)."""
    if len(nodes) < 2:
        raise InputError("PC needs at least two variables")
    adjacency, separating_sets = build_skeleton(nodes, ci_test, max_cond_size)
    pairs = {frozenset((x, y)) for x, adj in adjacency.items() for y in adj}
    graph = PartialGraph.from_skeleton(nodes, pairs)
    orient_v_structures(graph, separating_sets)
    apply_meek_rules(graph)
    return graph.to_cpdag()


def pc_stable(data: DatasetTable, config: Optional[PcConfig] = None) -> Cpdag:
    config = config or PcConfig()
    tester = FisherZTest(data.values, alpha=config.alpha)
    position = {name: i for i, name in enumerate(data.columns)}

    def ci_test(x: str, y: str, cond: tuple[str, ...]) -> bool:
        return tester(position[x], position[y], [position[c] for c in cond])

    cpdag = pc_from_ci_test(data.columns, ci_test, config.max_cond_size)
    logger.info(
        f"PC-stable finished: {len(cpdag.directed)} directed, "
        f"{len(cpdag.undirected)} undirected edges"
    )
    return cpdag
