from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class ProcessDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    index: int = Field(ge=1)
    station: int = Field(ge=1)
    nodes: list[str]


class MechanismDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    target: str
    inputs: list[str] = Field(default_factory=list)
    prediction_column: str


class GraphDocument(BaseModel):
    """On-disk form of a layered DAG or of prior knowledge."""

    model_config = ConfigDict(extra="forbid")

    processes: list[ProcessDocument]
    edges: list[tuple[str, str]] = Field(default_factory=list)
    mechanisms: list[MechanismDocument] = Field(default_factory=list)
    process_edges: Optional[list[tuple[int, int]]] = None


class CrossEdgeDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cross_edges: list[tuple[str, str]]
    naive: bool = False
    seed: int = 0
