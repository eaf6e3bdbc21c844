from .graph import Cpdag, LayeredDag, MechanismSpec, PriorKnowledge, ProcessGraph
from .dataset import DatasetTable
from .spam import SplineAdditiveModel
from .drf import DistributionalForest
from .pipeline import PipelineModel, SmoothBootstrapSpec

__all__ = [
    "Cpdag",
    "LayeredDag",
    "MechanismSpec",
    "PriorKnowledge",
    "ProcessGraph",
    "DatasetTable",
    "SplineAdditiveModel",
    "DistributionalForest",
    "PipelineModel",
    "SmoothBootstrapSpec",
]
