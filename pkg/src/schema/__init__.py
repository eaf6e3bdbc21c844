from .config import (
    BenchmarkConfig,
    DrfConfig,
    LineConfig,
    LingamConfig,
    NotearsConfig,
    PcConfig,
    PipelineConfig,
    SortnregressConfig,
    SpamConfig,
)
from .graph import CrossEdgeDocument, GraphDocument
from .report import BenchmarkReport, BenchmarkRun, FidelityReport, StructuralScore

__all__ = [
    "BenchmarkConfig",
    "DrfConfig",
    "LineConfig",
    "LingamConfig",
    "NotearsConfig",
    "PcConfig",
    "PipelineConfig",
    "SortnregressConfig",
    "SpamConfig",
    "CrossEdgeDocument",
    "GraphDocument",
    "BenchmarkReport",
    "BenchmarkRun",
    "FidelityReport",
    "StructuralScore",
]
