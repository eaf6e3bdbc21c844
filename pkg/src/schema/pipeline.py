from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.schema.config import DrfConfig
from src.schema.graph import GraphDocument


class NodeDescriptor(BaseModel):
    model_config = ConfigDict(extra="forbid")

    node: str
    kind: Literal["source", "forest"]
    bandwidth: float = Field(ge=0)
    predictors: list[str] = Field(default_factory=list)
    jitter_scale: float = Field(default=0.0, ge=0)
    drf: Optional[DrfConfig] = None


class ModelMeta(BaseModel):
    """JSON header section of a model container."""

    model_config = ConfigDict(extra="forbid")

    graph: GraphDocument
    order: list[str]
    nodes: list[NodeDescriptor]
    fit_meta: dict[str, Any] = Field(default_factory=dict)
