import logging
from typing import Optional, Sequence

import numpy as np

from src.model.dataset import DatasetTable
from src.model.graph import LayeredDag
from src.schema.config import SortnregressConfig
from src.service.discovery.regression import lasso_bic

logger = logging.getLogger(__name__)


def regress_along_order(
    values: np.ndarray, names: Sequence[str], order: Sequence[int], num_alphas: int
) -> LayeredDag:
    """Sparse-regress each variable on its predecessors in ``order``; nonzero weights become edges."""
    edges = set()
    for position, target in enumerate(order):
        predecessors = list(order[:position])
        if not predecessors:
            continue
        coef = lasso_bic(values[:, predecessors], values[:, target], num_alphas=num_alphas)
        for source, weight in zip(predecessors, coef):
            if weight != 0:
                edges.add((names[source], names[target]))
    return LayeredDag.flat(names, edges)


def sortnregress(data: DatasetTable, config: Optional[SortnregressConfig] = None) -> LayeredDag:
    """Order variables by increasing marginal variance, then lasso-regress along that order."""
    config = config or SortnregressConfig()
    # rounding lets float dust in standardized columns count as a tie;
    # the stable sort then keeps column order among ties
    variances = np.round(data.values.var(axis=0), 12)
    order = [int(i) for i in np.argsort(variances, kind="stable")]
    dag = regress_along_order(data.values, data.columns, order, config.num_alphas)
    logger.info(f"sortnregress finished: {len(dag.edges)} edges")
    return dag
