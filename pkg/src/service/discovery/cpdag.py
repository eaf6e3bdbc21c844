"""
Partially directed graphs: v-structure orientation, Meek closure and the
CPDAG of a DAG.
"""

from itertools import combinations, permutations
from typing import Iterable, Mapping

from src.model.graph import Cpdag, Edge, LayeredDag


class PartialGraph:
    """Mutable working graph with directed and undirected edges."""

    def __init__(self, nodes: Iterable[str]):
        self.nodes = sorted(nodes)
        self.directed: set[Edge] = set()
        self.undirected: set[frozenset[str]] = set()

    @classmethod
    def from_skeleton(cls, nodes: Iterable[str], pairs: Iterable[Iterable[str]]) -> "PartialGraph":
        graph = cls(nodes)
        graph.undirected = {frozenset(p) for p in pairs}
        return graph

    def adjacent(self, a: str, b: str) -> bool:
        return (
            (a, b) in self.directed
            or (b, a) in self.directed
            or frozenset((a, b)) in self.undirected
        )

    def is_undirected(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.undirected

    def orient(self, a: str, b: str) -> bool:
        """Turn a-b into a→b; returns False when a-b is not undirected."""
        pair = frozenset((a, b))
        if pair not in self.undirected:
            return False
        self.undirected.discard(pair)
        self.directed.add((a, b))
        return True

    def to_cpdag(self) -> Cpdag:
        return Cpdag(tuple(self.nodes), frozenset(self.directed), frozenset(self.undirected))


def orient_v_structures(
    graph: PartialGraph, separating_sets: Mapping[frozenset[str], Iterable[str]]
) -> None:
    """
    Orient x→z←y for every x-z-y with x, y nonadjacent and z outside their
    separating set. An edge proposed in both directions stays undirected.
    """
    proposals: set[Edge] = set()
    for x, y in combinations(graph.nodes, 2):
        if graph.adjacent(x, y):
            continue
        sepset = set(separating_sets.get(frozenset((x, y)), ()))
        for z in graph.nodes:
            if z in (x, y) or z in sepset:
                continue
            if graph.is_undirected(x, z) and graph.is_undirected(y, z):
                proposals.add((x, z))
                proposals.add((y, z))
    for a, b in sorted(proposals):
        if (b, a) not in proposals:
            graph.orient(a, b)


def apply_meek_rules(graph: PartialGraph) -> None:
    """Apply Meek rules 1-4 until no undirected edge can be oriented."""
    nodes = graph.nodes
    changed = True
    while changed:
        changed = False
        for a, b in permutations(nodes, 2):
            if not graph.is_undirected(a, b):
                continue
            if _rule1(graph, a, b) or _rule2(graph, a, b) or _rule3(graph, a, b) or _rule4(graph, a, b):
                graph.orient(a, b)
                changed = True


def _rule1(graph: PartialGraph, a: str, b: str) -> bool:
    # c→a-b with c, b nonadjacent
    return any(
        (c, a) in graph.directed and not graph.adjacent(c, b)
        for c in graph.nodes
        if c not in (a, b)
    )


def _rule2(graph: PartialGraph, a: str, b: str) -> bool:
    # a→c→b with a-b
    return any(
        (a, c) in graph.directed and (c, b) in graph.directed
        for c in graph.nodes
        if c not in (a, b)
    )


def _rule3(graph: PartialGraph, a: str, b: str) -> bool:
    # a-c→b and a-d→b with c, d nonadjacent
    middles = [
        c
        for c in graph.nodes
        if c not in (a, b) and graph.is_undirected(a, c) and (c, b) in graph.directed
    ]
    return any(not graph.adjacent(c, d) for c, d in combinations(middles, 2))


def _rule4(graph: PartialGraph, a: str, b: str) -> bool:
    # a-c→d→b with c, b nonadjacent and a adjacent to d
    for c in graph.nodes:
        if c in (a, b) or not graph.is_undirected(a, c) or graph.adjacent(c, b):
            continue
        for d in graph.nodes:
            if d in (a, b, c):
                continue
            if (c, d) in graph.directed and (d, b) in graph.directed and graph.adjacent(a, d):
                return True
    return False


def v_structures(dag: LayeredDag) -> set[tuple[str, str, str]]:
    """Triples (x, z, y) with x→z←y, x < y and x, y nonadjacent."""
    found = set()
    for z in dag.nodes:
        for x, y in combinations(sorted(dag.parents[z]), 2):
            if not dag.has_edge(x, y) and not dag.has_edge(y, x):
                found.add((x, z, y))
    return found


def cpdag_of(dag: LayeredDag) -> Cpdag:
    """CPDAG of the Markov equivalence class of ``dag``."""
    graph = PartialGraph.from_skeleton(dag.nodes, (frozenset(e) for e in dag.edges))
    for x, z, y in v_structures(dag):
        graph.orient(x, z)
        graph.orient(y, z)
    apply_meek_rules(graph)
    return graph.to_cpdag()
