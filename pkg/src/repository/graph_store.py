import logging
from pathlib import Path
from typing import Iterable, Mapping, Optional

from src.core.exceptions import StructuralError
from src.model.graph import Edge, LayeredDag, MechanismSpec, PriorKnowledge, ProcessGraph
from src.schema.graph import CrossEdgeDocument, GraphDocument, MechanismDocument, ProcessDocument
from .base import JsonDocumentRepository, PathLike

logger = logging.getLogger(__name__)


def dag_to_document(
    dag: LayeredDag, mechanisms: Optional[Mapping[str, MechanismSpec]] = None
) -> GraphDocument:
    return GraphDocument(
        processes=[
            ProcessDocument(index=k, station=dag.station_of[k], nodes=list(members))
            for k, members in dag.processes.items()
        ],
        edges=sorted(dag.edges, key=lambda e: (dag.index[e[0]], dag.index[e[1]])),
        mechanisms=[
            MechanismDocument(
                target=m.target, inputs=list(m.inputs), prediction_column=m.prediction_column
            )
            for _, m in sorted((mechanisms or {}).items())
        ],
    )


def document_to_dag(document: GraphDocument) -> LayeredDag:
    """Layered DAG described by ``document``; structural violations raise StructuralError."""
    return LayeredDag.from_processes(
        [(p.index, p.station, p.nodes) for p in document.processes], document.edges
    )


def prior_to_document(prior: PriorKnowledge) -> GraphDocument:
    document = dag_to_document(prior.union, prior.mechanisms)
    if prior.process_level_edges is not None:
        document.process_edges = sorted(prior.process_level_edges)
    return document


def document_to_prior(document: GraphDocument) -> PriorKnowledge:
    owner: dict[str, int] = {}
    for process in document.processes:
        for node in process.nodes:
            if node in owner:
                raise StructuralError(f"Duplicate node ids: {node}")
            owner[node] = process.index

    per_process: dict[int, set[Edge]] = {p.index: set() for p in document.processes}
    for u, v in document.edges:
        if u not in owner or v not in owner:
            raise StructuralError(f"Edge ({u}, {v}) references an unknown node")
        if owner[u] != owner[v]:
            raise StructuralError(
                f"Prior edge ({u}, {v}) crosses from process {owner[u]} to {owner[v]}"
            )
        per_process[owner[u]].add((u, v))

    mechanisms = {}
    for m in document.mechanisms:
        if m.target in mechanisms:
            raise StructuralError(f"Two mechanisms declared for {m.target}")
        mechanisms[m.target] = MechanismSpec(m.target, tuple(m.inputs), m.prediction_column)

    return PriorKnowledge(
        tuple(
            ProcessGraph(p.index, p.station, tuple(p.nodes), frozenset(per_process[p.index]))
            for p in document.processes
        ),
        mechanisms,
        frozenset(document.process_edges) if document.process_edges is not None else None,
    )


class GraphRepository(JsonDocumentRepository[GraphDocument]):
    """Graph and prior-knowledge JSON files."""

    def __init__(self):
        super().__init__(GraphDocument)

    def load_dag(self, path: PathLike) -> LayeredDag:
        return document_to_dag(self.read(path))

    def save_dag(
        self,
        path: PathLike,
        dag: LayeredDag,
        mechanisms: Optional[Mapping[str, MechanismSpec]] = None,
    ) -> Path:
        return self.write(path, dag_to_document(dag, mechanisms))

    def load_prior(self, path: PathLike) -> PriorKnowledge:
        return document_to_prior(self.read(path))

    def save_prior(self, path: PathLike, prior: PriorKnowledge) -> Path:
        return self.write(path, prior_to_document(prior))


class CrossEdgeRepository(JsonDocumentRepository[CrossEdgeDocument]):
    def __init__(self):
        super().__init__(CrossEdgeDocument)

    def save_edges(
        self, path: PathLike, edges: Iterable[Edge], naive: bool = False, seed: int = 0
    ) -> Path:
        return self.write(
            path, CrossEdgeDocument(cross_edges=sorted(edges), naive=naive, seed=seed)
        )

    def load_edges(self, path: PathLike) -> frozenset[Edge]:
        return frozenset(tuple(e) for e in self.read(path).cross_edges)
