"""
Linear NOTEARS: least-squares structure learning with the smooth
acyclicity constraint h(W) = tr(exp(W o W)) - d = 0, solved by an
augmented Lagrangian with L-BFGS-B inner steps.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as slin
import scipy.optimize as sopt

from src.model.dataset import DatasetTable
from src.model.graph import LayeredDag, find_cycle
from src.schema.config import NotearsConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightedAdjacency:
    nodes: tuple[str, ...]
    weights: np.ndarray
    threshold: float
    h_value: float
    flagged: bool
    outer_iterations: int
    rho: float
    pruned_edges: tuple[tuple[str, str], ...] = ()

    def to_dag(self) -> LayeredDag:
        rows, cols = np.nonzero(self.weights)
        return LayeredDag.flat(
            self.nodes, {(self.nodes[i], self.nodes[j]) for i, j in zip(rows, cols)}
        )


def acyclicity(W: np.ndarray) -> tuple[float, np.ndarray]:
    """h(W) and its gradient 2 * exp(W o W)^T o W."""
    E = slin.expm(W * W)
    return float(np.trace(E) - W.shape[0]), E.T * W * 2


def _least_squares(X: np.ndarray, W: np.ndarray) -> tuple[float, np.ndarray]:
    n = X.shape[0]
    R = X - X @ W
    return 0.5 / n * float((R**2).sum()), -1.0 / n * X.T @ R


def prune_cycles(
    W: np.ndarray, nodes: Sequence[str]
) -> tuple[np.ndarray, list[tuple[str, str]]]:
    """Drop the weakest edge of each remaining cycle until the support is acyclic."""
    W = W.copy()
    pruned: list[tuple[str, str]] = []
    index = {name: i for i, name in enumerate(nodes)}
    while True:
        rows, cols = np.nonzero(W)
        edges = [(nodes[i], nodes[j]) for i, j in zip(rows, cols)]
        cycle = find_cycle(nodes, edges)
        if not cycle:
            return W, pruned
        cycle_edges = list(zip(cycle, cycle[1:] + cycle[:1]))
        u, v = min(cycle_edges, key=lambda e: abs(W[index[e[0]], index[e[1]]]))
        W[index[u], index[v]] = 0.0
        pruned.append((u, v))


def notears_linear(
    data: DatasetTable, config: Optional[NotearsConfig] = None
) -> WeightedAdjacency:
    config = config or NotearsConfig()
    X = data.values - data.values.mean(axis=0)
    n, d = X.shape

    def _adj(w: np.ndarray) -> np.ndarray:
        return (w[: d * d] - w[d * d :]).reshape(d, d)

    def _func(w: np.ndarray) -> tuple[float, np.ndarray]:
        W = _adj(w)
        loss, G_loss = _least_squares(X, W)
        h, G_h = acyclicity(W)
        obj = loss + 0.5 * rho * h * h + alpha * h + config.lambda_1 * w.sum()
        G_smooth = G_loss + (rho * h + alpha) * G_h
        g_obj = np.concatenate((G_smooth + config.lambda_1, -G_smooth + config.lambda_1), axis=None)
        return obj, g_obj

    # positive and negative parts; diagonal pinned to zero
    bounds = [
        (0, 0) if i == j else (0, None) for _ in range(2) for i in range(d) for j in range(d)
    ]
    w_est = np.zeros(2 * d * d)
    rho, alpha, h = 1.0, 0.0, np.inf
    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        w_new, h_new = w_est, h
        while rho < config.rho_max:
            solution = sopt.minimize(
                _func,
                w_est,
                method="L-BFGS-B",
                jac=True,
                bounds=bounds,
                options={"maxiter": config.inner_max_iter, "ftol": config.inner_tol},
            )
            w_new = solution.x
            h_new, _ = acyclicity(_adj(w_new))
            if h_new > 0.25 * h:
                rho *= 10
            else:
                break
        w_est, h = w_new, h_new
        alpha += rho * h
        if h <= config.h_tol or rho >= config.rho_max:
            break

    flagged = bool(h > config.h_tol)
    if flagged:
        logger.warning(
            f"NOTEARS stopped with h={h:.3g} > h_tol={config.h_tol:.1g} (rho={rho:.1g})"
        )

    W = _adj(w_est)
    W[np.abs(W) < config.w_threshold] = 0.0
    W, pruned = prune_cycles(W, data.columns)
    if pruned:
        logger.warning(f"NOTEARS output had cycles; pruned edges {pruned}")

    return WeightedAdjacency(
        nodes=data.columns,
        weights=W,
        threshold=config.w_threshold,
        h_value=float(h),
        flagged=flagged,
        outer_iterations=iterations,
        rho=float(rho),
        pruned_edges=tuple(pruned),
    )
