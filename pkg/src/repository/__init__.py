from .base import JsonDocumentRepository
from .dataset_store import DatasetRepository
from .graph_store import CrossEdgeRepository, GraphRepository
from .model_store import ModelRepository, load_model, save_model
from .report_store import BenchmarkReportRepository, FidelityReportRepository

__all__ = [
    "JsonDocumentRepository",
    "DatasetRepository",
    "CrossEdgeRepository",
    "GraphRepository",
    "ModelRepository",
    "load_model",
    "save_model",
    "BenchmarkReportRepository",
    "FidelityReportRepository",
]
