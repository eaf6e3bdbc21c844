"""
DirectLiNGAM: repeatedly pick the variable that looks most independent of
its regression residuals, regress it out, and continue on the remainder.
"""

import logging
from typing import Optional

import numpy as np

from src.core.exceptions import InputError
from src.model.dataset import DatasetTable
from src.model.graph import LayeredDag
from src.schema.config import LingamConfig
from src.service.discovery.sortnregress import regress_along_order

logger = logging.getLogger(__name__)


def _standardize(x: np.ndarray) -> np.ndarray:
    sd = x.std()
    return (x - x.mean()) / sd if sd > 0 else x - x.mean()


def entropy(u: np.ndarray, config: LingamConfig) -> float:
    """Maximum-entropy approximation of the differential entropy of a standardized variable."""
    return float(
        (1 + np.log(2 * np.pi)) / 2
        - config.k1 * (np.mean(np.log(np.cosh(u))) - config.gamma) ** 2
        - config.k2 * (np.mean(u * np.exp(-(u**2) / 2))) ** 2
    )


def _residual(xi: np.ndarray, xj: np.ndarray) -> np.ndarray:
    var = np.var(xj)
    if var == 0:
        return xi.copy()
    return xi - (np.mean((xi - xi.mean()) * (xj - xj.mean())) / var) * xj


def likelihood_ratio(xi: np.ndarray, xj: np.ndarray, config: LingamConfig) -> float:
    """Pairwise score; positive values favour xi -> xj."""
    xi_std, xj_std = _standardize(xi), _standardize(xj)
    ri_j = _standardize(_residual(xi_std, xj_std))
    rj_i = _standardize(_residual(xj_std, xi_std))
    return (entropy(xj_std, config) + entropy(ri_j, config)) - (
        entropy(xi_std, config) + entropy(rj_i, config)
    )


def search_causal_order(values: np.ndarray, config: LingamConfig) -> list[int]:
    X = np.array(values, dtype=float)
    remaining = list(range(X.shape[1]))
    order: list[int] = []
    while remaining:
        if len(remaining) == 1:
            order.append(remaining.pop())
            break
        scores = []
        for i in remaining:
            penalty = 0.0
            for j in remaining:
                if i != j:
                    penalty += min(0.0, likelihood_ratio(X[:, i], X[:, j], config)) ** 2
            scores.append(-penalty)
        root = remaining[int(np.argmax(scores))]
        for i in remaining:
            if i != root:
                X[:, i] = _residual(X[:, i], X[:, root])
        order.append(root)
        remaining.remove(root)
    return order


def direct_lingam(data: DatasetTable, config: Optional[LingamConfig] = None) -> LayeredDag:
    config = config or LingamConfig()
    if data.num_rows < 3:
        raise InputError(f"DirectLiNGAM needs at least 3 rows, got {data.num_rows}")
    values = data.values - data.values.mean(axis=0)
    sd = values.std(axis=0)
    values = values / np.where(sd > 0, sd, 1.0)

    order = search_causal_order(values, config)
    logger.debug(f"DirectLiNGAM order: {[data.columns[i] for i in order]}")
    dag = regress_along_order(values, data.columns, order, config.num_alphas)
    logger.info(f"DirectLiNGAM finished: {len(dag.edges)} edges")
    return dag
