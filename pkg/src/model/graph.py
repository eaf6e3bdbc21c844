from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

import networkx as nx
import numpy as np

from src.core.exceptions import StructuralError

NodeId = str
Edge = tuple[str, str]


def find_cycle(nodes: Iterable[str], edges: Iterable[Edge]) -> Optional[list[str]]:
    """Return the nodes of one directed cycle, or None when the graph is acyclic."""
    graph = nx.DiGraph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from(edges)
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        return None
    return [u for u, _ in cycle]


def _freeze_edges(edges: Iterable[Edge]) -> frozenset[Edge]:
    return frozenset((str(u), str(v)) for u, v in edges)


@dataclass(frozen=True, eq=False)
class LayeredDag:
    """
    DAG whose nodes are partitioned into consecutive processes 1..K,
    grouped into stations. Edges never point from a later process to an
    earlier one. Instances are validated on construction and immutable.
    """

    nodes: tuple[NodeId, ...]
    process_of: Mapping[NodeId, int]
    station_of: Mapping[int, int]
    edges: frozenset[Edge]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(str(n) for n in self.nodes))
        object.__setattr__(
            self,
            "process_of",
            MappingProxyType({str(k): int(v) for k, v in self.process_of.items()}),
        )
        object.__setattr__(
            self,
            "station_of",
            MappingProxyType({int(k): int(v) for k, v in self.station_of.items()}),
        )
        object.__setattr__(self, "edges", _freeze_edges(self.edges))
        self._validate()

    def _validate(self) -> None:
        seen: set[str] = set()
        duplicates = sorted({n for n in self.nodes if n in seen or seen.add(n)})
        if duplicates:
            raise StructuralError(f"Duplicate node ids: {', '.join(duplicates)}")

        missing = [n for n in self.nodes if n not in self.process_of]
        if missing:
            raise StructuralError(f"Nodes without a process: {', '.join(missing)}")
        extra = sorted(set(self.process_of) - seen)
        if extra:
            raise StructuralError(f"Process map names unknown nodes: {', '.join(extra)}")

        used = sorted(set(self.process_of.values()))
        if used and used != list(range(1, len(used) + 1)):
            raise StructuralError(
                f"Processes must be consecutive integers 1..K, got {used}"
            )
        no_station = [k for k in used if k not in self.station_of]
        if no_station:
            raise StructuralError(f"Processes without a station: {no_station}")

        for u, v in sorted(self.edges):
            if u not in seen or v not in seen:
                raise StructuralError(f"Edge ({u}, {v}) references an unknown node")
            if u == v:
                raise StructuralError(f"Self-loop on node {u}")
            if self.process_of[u] > self.process_of[v]:
                raise StructuralError(
                    f"Edge ({u}, {v}) points from process {self.process_of[u]} "
                    f"back to process {self.process_of[v]}"
                )

        cycle = find_cycle(self.nodes, self.edges)
        if cycle:
            raise StructuralError(f"Graph contains a cycle: {' -> '.join(cycle + cycle[:1])}")

    # ---- constructors -------------------------------------------------

    @classmethod
    def flat(cls, nodes: Iterable[str], edges: Iterable[Edge] = ()) -> "LayeredDag":
        """A DAG without layering information (every node in process 1)."""
        nodes = tuple(nodes)
        return cls(nodes, {n: 1 for n in nodes}, {1: 1}, _freeze_edges(edges))

    @classmethod
    def from_processes(
        cls,
        processes: Iterable[tuple[int, int, Iterable[str]]],
        edges: Iterable[Edge] = (),
    ) -> "LayeredDag":
        """Build from ``(process index, station index, nodes)`` triples."""
        nodes: list[str] = []
        process_of: dict[str, int] = {}
        station_of: dict[int, int] = {}
        for index, station, members in sorted(processes, key=lambda p: p[0]):
            if int(index) in station_of:
                raise StructuralError(f"Process index {index} is declared twice")
            station_of[int(index)] = int(station)
            for node in members:
                nodes.append(str(node))
                process_of[str(node)] = int(index)
        return cls(tuple(nodes), process_of, station_of, _freeze_edges(edges))

    def with_edges(self, edges: Iterable[Edge]) -> "LayeredDag":
        return LayeredDag(self.nodes, self.process_of, self.station_of, _freeze_edges(edges))

    def restrict(self, keep: Iterable[str]) -> "LayeredDag":
        """Induced subgraph on ``keep``, with processes renumbered 1..K'."""
        keep_set = set(keep)
        unknown = keep_set - set(self.nodes)
        if unknown:
            raise StructuralError(f"Unknown nodes: {', '.join(sorted(unknown))}")
        nodes = [n for n in self.nodes if n in keep_set]
        old_processes = sorted({self.process_of[n] for n in nodes})
        renumber = {old: new for new, old in enumerate(old_processes, start=1)}
        return LayeredDag(
            tuple(nodes),
            {n: renumber[self.process_of[n]] for n in nodes},
            {renumber[k]: self.station_of[k] for k in old_processes},
            frozenset((u, v) for u, v in self.edges if u in keep_set and v in keep_set),
        )

    # ---- structure ----------------------------------------------------

    @cached_property
    def index(self) -> dict[NodeId, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    @cached_property
    def parents(self) -> dict[NodeId, tuple[NodeId, ...]]:
        result: dict[str, list[str]] = {n: [] for n in self.nodes}
        for u, v in self.edges:
            result[v].append(u)
        return {n: tuple(sorted(ps, key=self.index.__getitem__)) for n, ps in result.items()}

    @cached_property
    def children(self) -> dict[NodeId, tuple[NodeId, ...]]:
        result: dict[str, list[str]] = {n: [] for n in self.nodes}
        for u, v in self.edges:
            result[u].append(v)
        return {n: tuple(sorted(cs, key=self.index.__getitem__)) for n, cs in result.items()}

    @property
    def num_processes(self) -> int:
        return max(self.process_of.values(), default=0)

    @cached_property
    def processes(self) -> dict[int, tuple[NodeId, ...]]:
        result: dict[int, list[str]] = {k: [] for k in range(1, self.num_processes + 1)}
        for n in self.nodes:
            result[self.process_of[n]].append(n)
        return {k: tuple(v) for k, v in result.items()}

    @cached_property
    def stations(self) -> dict[int, tuple[int, ...]]:
        result: dict[int, list[int]] = {}
        for k in sorted(self.processes):
            result.setdefault(self.station_of[k], []).append(k)
        return {s: tuple(ks) for s, ks in sorted(result.items())}

    def station_nodes(self, station: int) -> tuple[NodeId, ...]:
        processes = set(self.stations.get(station, ()))
        return tuple(n for n in self.nodes if self.process_of[n] in processes)

    def nodes_before(self, process: int) -> tuple[NodeId, ...]:
        """All nodes of processes strictly earlier than ``process``."""
        return tuple(n for n in self.nodes if self.process_of[n] < process)

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self.edges

    @cached_property
    def cross_process_edges(self) -> frozenset[Edge]:
        return frozenset(e for e in self.edges if self.process_of[e[0]] != self.process_of[e[1]])

    @cached_property
    def within_process_edges(self) -> frozenset[Edge]:
        return self.edges - self.cross_process_edges

    def adjacency_matrix(self) -> np.ndarray:
        """Boolean matrix A with A[i, j] true iff nodes[i] -> nodes[j]."""
        matrix = np.zeros((len(self.nodes), len(self.nodes)), dtype=bool)
        for u, v in self.edges:
            matrix[self.index[u], self.index[v]] = True
        return matrix

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        for n in self.nodes:
            graph.add_node(n, process=self.process_of[n], station=self.station_of[self.process_of[n]])
        graph.add_edges_from(sorted(self.edges))
        return graph

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LayeredDag):
            return NotImplemented
        return (
            set(self.nodes) == set(other.nodes)
            and self.edges == other.edges
            and dict(self.process_of) == dict(other.process_of)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"LayeredDag(nodes={len(self.nodes)}, edges={len(self.edges)}, "
            f"processes={self.num_processes})"
        )


@dataclass(frozen=True)
class MechanismSpec:
    """Known mechanism f*_k entering as a per-row prediction column."""

    target: NodeId
    inputs: tuple[NodeId, ...]
    prediction_column: str


@dataclass(frozen=True)
class ProcessGraph:
    index: int
    station: int
    nodes: tuple[NodeId, ...]
    edges: frozenset[Edge] = field(default_factory=frozenset)


@dataclass(frozen=True, eq=False)
class PriorKnowledge:
    """
    Expert knowledge: one DAG per process, optional known mechanisms and an
    optional process-level graph restricting which processes may influence
    which.
    """

    process_graphs: tuple[ProcessGraph, ...]
    mechanisms: Mapping[NodeId, MechanismSpec] = field(default_factory=dict)
    process_level_edges: Optional[frozenset[tuple[int, int]]] = None

    def __post_init__(self):
        graphs = tuple(sorted(self.process_graphs, key=lambda g: g.index))
        object.__setattr__(self, "process_graphs", graphs)
        object.__setattr__(self, "mechanisms", MappingProxyType(dict(self.mechanisms)))
        if self.process_level_edges is not None:
            object.__setattr__(
                self,
                "process_level_edges",
                frozenset((int(j), int(t)) for j, t in self.process_level_edges),
            )
        self._validate()

    def _validate(self) -> None:
        owner: dict[str, int] = {}
        for graph in self.process_graphs:
            for node in graph.nodes:
                if node in owner:
                    raise StructuralError(
                        f"Node {node} appears in processes {owner[node]} and {graph.index}"
                    )
                owner[node] = graph.index
            members = set(graph.nodes)
            for u, v in graph.edges:
                if u not in members or v not in members:
                    raise StructuralError(
                        f"Edge ({u}, {v}) of process {graph.index} leaves its node set"
                    )

        # builds and validates the union graph (acyclicity, consecutive indices)
        union = self.union

        for target, spec in self.mechanisms.items():
            if target != spec.target:
                raise StructuralError(f"Mechanism keyed by {target} targets {spec.target}")
            if target not in union.index:
                raise StructuralError(f"Mechanism for unknown node {target}")
            stray = set(spec.inputs) - set(union.parents[target])
            if stray:
                raise StructuralError(
                    f"Mechanism inputs {sorted(stray)} are not process parents of {target}"
                )

        if self.process_level_edges is not None:
            k = union.num_processes
            for j, t in sorted(self.process_level_edges):
                if not (1 <= j < t <= k):
                    raise StructuralError(
                        f"Process-level edge ({j}, {t}) is incompatible with the process order 1..{k}"
                    )

    @cached_property
    def union(self) -> LayeredDag:
        """Graph union of all process graphs."""
        edges: set[Edge] = set()
        for graph in self.process_graphs:
            edges |= set(graph.edges)
        return LayeredDag.from_processes(
            [(g.index, g.station, g.nodes) for g in self.process_graphs], edges
        )

    @property
    def num_processes(self) -> int:
        return len(self.process_graphs)

    def process_parents(self, process: int) -> Optional[tuple[int, ...]]:
        """pa_G(t) in the process-level graph, or None when no such graph is given."""
        if self.process_level_edges is None:
            return None
        return tuple(sorted(j for j, t in self.process_level_edges if t == process))

    def mechanism(self, node: str) -> Optional[MechanismSpec]:
        return self.mechanisms.get(node)

    @classmethod
    def from_dag(
        cls,
        dag: LayeredDag,
        mechanisms: Optional[Mapping[str, MechanismSpec]] = None,
        process_level_edges: Optional[Iterable[tuple[int, int]]] = None,
    ) -> tuple["PriorKnowledge", frozenset[Edge]]:
        """Split a layered DAG into per-process graphs and the cross-process edges."""
        graphs = []
        for k, members in dag.processes.items():
            member_set = set(members)
            graphs.append(
                ProcessGraph(
                    index=k,
                    station=dag.station_of[k],
                    nodes=members,
                    edges=frozenset(
                        (u, v) for u, v in dag.edges if u in member_set and v in member_set
                    ),
                )
            )
        prior = cls(
            tuple(graphs),
            mechanisms or {},
            frozenset(process_level_edges) if process_level_edges is not None else None,
        )
        return prior, dag.cross_process_edges


@dataclass(frozen=True, eq=False)
class Cpdag:
    """Completed partially directed acyclic graph."""

    nodes: tuple[NodeId, ...]
    directed: frozenset[Edge]
    undirected: frozenset[frozenset[NodeId]]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(str(n) for n in self.nodes))
        object.__setattr__(self, "directed", _freeze_edges(self.directed))
        object.__setattr__(
            self, "undirected", frozenset(frozenset(str(x) for x in pair) for pair in self.undirected)
        )
        known = set(self.nodes)
        pairs: set[frozenset[str]] = set()
        for u, v in self.directed:
            if u not in known or v not in known or u == v:
                raise StructuralError(f"Invalid directed edge ({u}, {v})")
            pair = frozenset((u, v))
            if pair in pairs:
                raise StructuralError(f"Pair {u}, {v} appears twice")
            pairs.add(pair)
        for pair in self.undirected:
            if len(pair) != 2 or not pair <= known:
                raise StructuralError(f"Invalid undirected edge {sorted(pair)}")
            if pair in pairs:
                raise StructuralError(f"Pair {sorted(pair)} is both directed and undirected")
            pairs.add(pair)

    @cached_property
    def adjacent_pairs(self) -> frozenset[frozenset[NodeId]]:
        return frozenset(frozenset(e) for e in self.directed) | self.undirected

    def adjacent(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.adjacent_pairs

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cpdag):
            return NotImplemented
        return (
            set(self.nodes) == set(other.nodes)
            and self.directed == other.directed
            and self.undirected == other.undirected
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"Cpdag(nodes={len(self.nodes)}, directed={len(self.directed)}, "
            f"undirected={len(self.undirected)})"
        )
