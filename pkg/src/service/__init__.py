from .graph import causal_order, d_separated, dag_from_cpdag, merge_ground_truth
from .spam import learn_cross_process_edges
from .drf import conditional_sample, drf_weights, fit_drf
from .synth import fidelity_report, fit_cell_pipelines, fit_pipeline, sample
from .metrics import precision_recall_f1, shd, varsortability

__all__ = [
    "causal_order",
    "d_separated",
    "dag_from_cpdag",
    "merge_ground_truth",
    "learn_cross_process_edges",
    "conditional_sample",
    "drf_weights",
    "fit_drf",
    "fidelity_report",
    "fit_cell_pipelines",
    "fit_pipeline",
    "sample",
    "precision_recall_f1",
    "shd",
    "varsortability",
]
