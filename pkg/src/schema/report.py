from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field

from src import __version__


class StructuralScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    shd: int = Field(ge=0)
    precision: float = Field(ge=0, le=1)
    recall: float = Field(ge=0, le=1)
    f1: float = Field(ge=0, le=1)
    true_edges: int = Field(ge=0)
    learned_edges: int = Field(ge=0)
    # set when a ratio had a zero denominator and was defined as 0
    precision_undefined: bool = False
    recall_undefined: bool = False


class BenchmarkRun(BaseModel):
    algorithm: str
    run: int = Field(ge=0)
    seed: int
    n: int = Field(ge=1)
    standardized: bool
    score: StructuralScore
    varsortability: Optional[float] = None
    wall_time_seconds: float = Field(ge=0)


class BenchmarkReport(BaseModel):
    runs: list[BenchmarkRun]
    config: dict[str, Any]
    version: str = __version__


class NodeFidelity(BaseModel):
    node: str
    ks: float = Field(ge=0, le=1)
    is_source: bool


class FidelitySummary(BaseModel):
    num_nodes: int = Field(ge=0)
    max: Optional[float] = None
    min: Optional[float] = None
    mean: Optional[float] = None


class FidelityReport(BaseModel):
    """KS statistics per node, highest disagreement first."""

    rows: int = Field(ge=1)
    nodes: list[NodeFidelity]
    non_source: FidelitySummary
    version: str = __version__

    def ranking(self) -> list[str]:
        return [entry.node for entry in self.nodes]
