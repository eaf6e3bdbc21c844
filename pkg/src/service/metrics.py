"""Structural scores of a learned DAG against the truth, and varsortability."""

import logging

import numpy as np

from src.core.exceptions import InputError
from src.model.dataset import DatasetTable
from src.model.graph import LayeredDag
from src.schema.report import StructuralScore

logger = logging.getLogger(__name__)

VARSORT_TOL = 1e-9


def _check_same_nodes(truth: LayeredDag, learned: LayeredDag) -> None:
    if set(truth.nodes) != set(learned.nodes):
        only_truth = sorted(set(truth.nodes) - set(learned.nodes))
        only_learned = sorted(set(learned.nodes) - set(truth.nodes))
        raise InputError(
            f"Graphs cover different nodes (truth only: {only_truth}, learned only: {only_learned})"
        )


def shd(truth: LayeredDag, learned: LayeredDag) -> int:
    """
    Structural Hamming distance over unordered node pairs: a missing or
    extra adjacency costs 1, and so does a reversed edge.
    """
    _check_same_nodes(truth, learned)
    pairs = {frozenset(e) for e in truth.edges} | {frozenset(e) for e in learned.edges}
    distance = 0
    for pair in pairs:
        a, b = tuple(pair)
        in_truth = {e for e in ((a, b), (b, a)) if e in truth.edges}
        in_learned = {e for e in ((a, b), (b, a)) if e in learned.edges}
        if in_truth != in_learned:
            distance += 1
    return distance


def precision_recall_f1(truth: LayeredDag, learned: LayeredDag) -> StructuralScore:
    _check_same_nodes(truth, learned)
    true_positive = len(truth.edges & learned.edges)
    num_learned, num_true = len(learned.edges), len(truth.edges)

    precision = true_positive / num_learned if num_learned else 0.0
    recall = true_positive / num_true if num_true else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return StructuralScore(
        shd=shd(truth, learned),
        precision=precision,
        recall=recall,
        f1=f1,
        true_edges=num_true,
        learned_edges=num_learned,
        precision_undefined=num_learned == 0,
        recall_undefined=num_true == 0,
    )


def varsortability(data: DatasetTable, truth: LayeredDag, tol: float = VARSORT_TOL) -> float:
    """
    Fraction of directed paths (each length counted separately) that run
    from a lower-variance node to a higher-variance one; ties count one half.
    NaN when the graph has no edges.
    """
    data.require(truth.nodes)
    variance = data.matrix(truth.nodes).var(axis=0)
    constant = [n for n, v in zip(truth.nodes, variance) if v == 0]
    if constant:
        raise InputError(f"Varsortability needs non-constant columns: {', '.join(constant)}")

    adjacency = truth.adjacency_matrix().astype(np.int64)
    ratio = variance[None, :] / variance[:, None]
    reach = adjacency.copy()
    num_paths = 0
    sorted_paths = 0.0
    for _ in range(len(truth.nodes) - 1):
        paths = reach > 0
        if not paths.any():
            break
        num_paths += int(paths.sum())
        sorted_paths += float((paths & (ratio > 1 + tol)).sum())
        sorted_paths += 0.5 * float((paths & (ratio <= 1 + tol) & (ratio > 1 - tol)).sum())
        reach = (paths.astype(np.int64) @ adjacency)
    if num_paths == 0:
        return float("nan")
    return sorted_paths / num_paths
