from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np

from src.core.exceptions import InputError, StructuralError
from src.model.drf import DistributionalForest
from src.model.graph import LayeredDag, NodeId


@dataclass(frozen=True, eq=False)
class SmoothBootstrapSpec:
    """Resampling law of a source node: a stored column plus Gaussian jitter."""

    training_column: np.ndarray
    bandwidth: float

    def __post_init__(self):
        column = np.array(self.training_column, dtype=float).ravel()
        if column.size == 0:
            raise InputError("Smooth bootstrap needs at least one training value")
        if self.bandwidth < 0:
            raise InputError("Smooth bootstrap bandwidth must be non-negative")
        column.setflags(write=False)
        object.__setattr__(self, "training_column", column)
        object.__setattr__(self, "bandwidth", float(self.bandwidth))


@dataclass(frozen=True, eq=False)
class PipelineModel:
    """
    Fitted generator for a DAG: sources are smooth-bootstrapped, every other
    node is drawn from a forest over its parents, in ``order``.
    """

    dag: LayeredDag
    order: tuple[NodeId, ...]
    source_specs: Mapping[NodeId, SmoothBootstrapSpec]
    conditionals: Mapping[NodeId, DistributionalForest]
    fit_meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "source_specs", MappingProxyType(dict(self.source_specs)))
        object.__setattr__(self, "conditionals", MappingProxyType(dict(self.conditionals)))
        object.__setattr__(self, "fit_meta", MappingProxyType(dict(self.fit_meta)))
        self._validate()

    def _validate(self) -> None:
        if sorted(self.order) != sorted(self.dag.nodes):
            raise StructuralError("Causal order does not list exactly the DAG nodes")
        position = {n: i for i, n in enumerate(self.order)}
        for u, v in self.dag.edges:
            if position[u] > position[v]:
                raise StructuralError(f"Order places {v} before its parent {u}")

        for node in self.dag.nodes:
            parents = self.dag.parents[node]
            if not parents:
                if node not in self.source_specs or node in self.conditionals:
                    raise StructuralError(f"Source node {node} needs a bootstrap spec only")
                continue
            forest = self.conditionals.get(node)
            if forest is None or node in self.source_specs:
                raise StructuralError(f"Node {node} needs a forest only")
            if set(forest.predictors) != set(parents):
                raise StructuralError(
                    f"Forest for {node} uses {list(forest.predictors)}, parents are {list(parents)}"
                )

    @property
    def num_sources(self) -> int:
        return len(self.source_specs)

    @property
    def num_forests(self) -> int:
        return len(self.conditionals)

    def __repr__(self) -> str:
        return (
            f"PipelineModel(nodes={len(self.dag.nodes)}, sources={self.num_sources}, "
            f"forests={self.num_forests})"
        )
