"""
Graph operations on layered DAGs: orderings, d-separation, ground-truth
assembly and DAG extension of CPDAGs.
"""

import logging
from collections import deque
from typing import Iterable

import networkx as nx
import numpy as np

from src.core.exceptions import ExtensionError, InputError, StructuralError
from src.model.graph import Cpdag, Edge, LayeredDag, PriorKnowledge, find_cycle

logger = logging.getLogger(__name__)


def topological_order(nodes: Iterable[str], edges: Iterable[Edge], key=None) -> list[str]:
    """Lexicographic topological sort; raises StructuralError naming a cycle."""
    nodes = list(nodes)
    edges = list(edges)
    graph = nx.DiGraph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from(edges)
    try:
        return list(nx.lexicographical_topological_sort(graph, key=key))
    except nx.NetworkXUnfeasible:
        cycle = find_cycle(nodes, edges) or []
        raise StructuralError(
            f"Graph contains a cycle: {' -> '.join(cycle + cycle[:1])}"
        ) from None


def causal_order(dag: LayeredDag) -> list[str]:
    """
    Causal order of ``dag``: parents before children, earlier processes
    before later ones, ties broken lexicographically by node id.
    """
    return topological_order(
        dag.nodes, dag.edges, key=lambda node: (dag.process_of[node], node)
    )


def _check_node_sets(dag: LayeredDag, *sets: set[str]) -> None:
    known = dag.index
    for group in sets:
        unknown = sorted(n for n in group if n not in known)
        if unknown:
            raise InputError(f"Unknown node ids: {', '.join(unknown)}")
    for i, first in enumerate(sets):
        for second in sets[i + 1 :]:
            shared = first & second
            if shared:
                raise InputError(
                    f"Node sets must be disjoint, both contain: {', '.join(sorted(shared))}"
                )


def d_separated(
    dag: LayeredDag, a: Iterable[str], b: Iterable[str], s: Iterable[str] = ()
) -> bool:
    """True iff ``a`` and ``b`` are d-separated given ``s`` in ``dag`` (Bayes-ball)."""
    a, b, s = set(a), set(b), set(s)
    _check_node_sets(dag, a, b, s)
    if not a or not b:
        return True

    parents, children = dag.parents, dag.children

    # ancestors of the conditioning set (including itself) open colliders
    opens: set[str] = set()
    pending = list(s)
    while pending:
        node = pending.pop()
        if node not in opens:
            opens.add(node)
            pending.extend(parents[node])

    # "up" means the trail arrives from a child, "down" from a parent
    queue = deque((node, "up") for node in sorted(a))
    visited: set[tuple[str, str]] = set()
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))

        if node not in s and node in b:
            return False

        if direction == "up":
            if node not in s:
                queue.extend((p, "up") for p in parents[node])
                queue.extend((c, "down") for c in children[node])
        else:
            if node not in s:
                queue.extend((c, "down") for c in children[node])
            if node in opens:
                queue.extend((p, "up") for p in parents[node])
    return True


def merge_ground_truth(prior: PriorKnowledge, cross_edges: Iterable[Edge]) -> LayeredDag:
    """Union of the process graphs and the learned cross-process edges."""
    union = prior.union
    merged = set(union.edges)
    for u, v in sorted((str(u), str(v)) for u, v in cross_edges):
        if u not in union.index or v not in union.index:
            raise StructuralError(f"Cross edge ({u}, {v}) references an unknown node")
        pu, pv = union.process_of[u], union.process_of[v]
        if pu == pv:
            raise StructuralError(f"Cross edge ({u}, {v}) lies within process {pu}")
        if pu > pv:
            raise StructuralError(
                f"Cross edge ({u}, {v}) points from process {pu} back to process {pv}"
            )
        merged.add((u, v))
    return union.with_edges(merged)


def dag_from_cpdag(cpdag: Cpdag, rng: np.random.Generator) -> LayeredDag:
    """
    Orient every undirected edge of ``cpdag`` without creating new
    v-structures or cycles.

    Repeatedly removes a sink whose undirected neighbours are adjacent to
    all of its other neighbours, orienting its undirected edges inward.
    Candidates are tried in a shuffled order, so different seeds reach
    different members of the equivalence class (not uniformly).
    """
    remaining = set(cpdag.nodes)
    directed = set(cpdag.directed)
    undirected = {tuple(sorted(pair)) for pair in cpdag.undirected}
    result = set(directed)

    def adjacent(x: str, y: str) -> bool:
        return (x, y) in directed or (y, x) in directed or tuple(sorted((x, y))) in undirected

    while remaining:
        candidates = sorted(remaining)
        rng.shuffle(candidates)
        chosen = None
        for x in candidates:
            if any(u == x for u, _ in directed):
                continue
            undirected_nbrs = [p[0] if p[1] == x else p[1] for p in undirected if x in p]
            neighbours = {y for y in remaining if y != x and adjacent(x, y)}
            if all(
                adjacent(y, z) for y in undirected_nbrs for z in neighbours if z != y
            ):
                chosen = x
                break
        if chosen is None:
            raise ExtensionError(
                f"CPDAG admits no consistent extension; stuck on nodes {sorted(remaining)}"
            )
        for pair in [p for p in undirected if chosen in p]:
            other = pair[0] if pair[1] == chosen else pair[1]
            result.add((other, chosen))
            undirected.discard(pair)
        directed = {(u, v) for u, v in directed if v != chosen}
        remaining.discard(chosen)

    return LayeredDag.flat(cpdag.nodes, result)
