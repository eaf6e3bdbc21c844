"""
Distributional random forests.

Trees are grown CART-style, but a split is scored by how far apart the two
children's response distributions are, measured with a random Fourier
approximation of the Gaussian-kernel MMD. A fitted forest turns a query
point into weights over the training rows; those weights define the
conditional distribution that is sampled from.
"""

import logging
import math
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from scipy.spatial.distance import pdist

from src.core.config import settings
from src.core.exceptions import DegenerateResponseError, InputError
from src.model.dataset import DatasetTable
from src.model.drf import DistributionalForest, TreeArrays
from src.schema.config import DrfConfig
from src.utils.seeding import child_rng

logger = logging.getLogger(__name__)

Query = Union[Mapping[str, float], Sequence[float], np.ndarray]

# seed-sequence stream ids below the forest seed
_TREE_STREAM = 0
_BANDWIDTH_STREAM = 1


def median_heuristic_bandwidth(
    response: np.ndarray,
    cap: int = 1000,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """
    Median of the pairwise absolute differences of ``response``.

    Columns longer than ``cap`` are subsampled without replacement first.
    """
    y = np.asarray(response, dtype=float).ravel()
    if y.size < 2 or np.all(y == y[0]):
        raise DegenerateResponseError("Response has fewer than two distinct values")
    if y.size > cap:
        rng = rng if rng is not None else child_rng(0)
        y = rng.choice(y, size=cap, replace=False)

    diffs = pdist(y[:, None])
    bandwidth = float(np.median(diffs))
    if bandwidth <= 0:
        # heavy ties: fall back to the typical nonzero gap
        nonzero = diffs[diffs > 0]
        bandwidth = float(np.median(nonzero)) if nonzero.size else float(np.std(response))
    return bandwidth


def silverman_bandwidth(column: np.ndarray) -> float:
    """Gaussian smoothing scale 0.9 * min(sd, IQR / 1.34) * n^(-1/5); 0 for constant columns."""
    x = np.asarray(column, dtype=float).ravel()
    if x.size < 2:
        return 0.0
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * x.size ** (-0.2)


def draw_frequencies(bandwidth: float, num_features: int, rng: np.random.Generator) -> np.ndarray:
    """Frequencies from the spectral density of a Gaussian kernel with the given width."""
    return rng.normal(0.0, 1.0 / bandwidth, size=num_features)


def fourier_features(values: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Random cosine/sine feature map, shape (n, 2 * len(omega))."""
    projection = np.outer(np.asarray(values, dtype=float).ravel(), omega)
    return np.hstack([np.cos(projection), np.sin(projection)]) / math.sqrt(len(omega))


def mmd_split_score(left: np.ndarray, right: np.ndarray, omega: np.ndarray) -> float:
    """
    Weighted squared MMD between two children,
    (n_L * n_R / n^2) * ||mean phi(left) - mean phi(right)||^2.
    """
    left = np.asarray(left, dtype=float).ravel()
    right = np.asarray(right, dtype=float).ravel()
    if left.size == 0 or right.size == 0:
        raise InputError("Both children of a split must be non-empty")
    n = left.size + right.size
    gap = fourier_features(left, omega).mean(axis=0) - fourier_features(right, omega).mean(axis=0)
    return float(left.size * right.size / n**2 * np.dot(gap, gap))


def _candidate_positions(sorted_values: np.ndarray, min_node_size: int, limit: int) -> np.ndarray:
    # position i puts sorted rows [0, i) on the left
    n = sorted_values.size
    positions = np.arange(min_node_size, n - min_node_size + 1)
    positions = positions[sorted_values[positions - 1] < sorted_values[positions]]
    if positions.size > limit:
        picks = np.unique(np.round(np.linspace(0, positions.size - 1, limit)).astype(int))
        positions = positions[picks]
    return positions


def _best_split(
    X: np.ndarray,
    phi: np.ndarray,
    features: np.ndarray,
    config: DrfConfig,
) -> tuple[float, int, float]:
    n = X.shape[0]
    best = (0.0, -1, 0.0)
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        positions = _candidate_positions(xs, config.min_node_size, config.max_candidates)
        if positions.size == 0:
            continue
        cumulative = np.cumsum(phi[order], axis=0)
        left_sum = cumulative[positions - 1]
        gap = left_sum / positions[:, None] - (cumulative[-1] - left_sum) / (n - positions)[:, None]
        scores = positions * (n - positions) / n**2 * np.einsum("ij,ij->i", gap, gap)
        k = int(np.argmax(scores))
        if scores[k] > best[0]:
            i = positions[k]
            best = (float(scores[k]), int(f), float((xs[i - 1] + xs[i]) / 2))
    return best


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    bandwidth: float,
    config: DrfConfig,
    rng: np.random.Generator,
    mtry: Optional[int] = None,
) -> TreeArrays:
    """Grow one tree on ``rows`` of (X, y); frequencies are redrawn at every node."""
    num_predictors = X.shape[1]
    mtry = min(mtry or num_predictors, num_predictors)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    members: list[np.ndarray] = []

    def new_node(node_rows: np.ndarray) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        members.append(node_rows)
        return len(feature) - 1

    stack = [new_node(np.asarray(rows, dtype=np.int64))]
    while stack:
        node = stack.pop()
        node_rows = members[node]
        if node_rows.size < 2 * config.min_node_size:
            continue
        omega = draw_frequencies(bandwidth, config.num_fourier_features, rng)
        phi = fourier_features(y[node_rows], omega)
        features = np.sort(rng.choice(num_predictors, size=mtry, replace=False))
        score, f, cut = _best_split(X[node_rows], phi, features, config)
        if f < 0:
            continue

        go_left = X[node_rows, f] <= cut
        feature[node] = f
        threshold[node] = cut
        left[node] = new_node(node_rows[go_left])
        right[node] = new_node(node_rows[~go_left])
        members[node] = np.zeros(0, dtype=np.int64)
        stack.extend([right[node], left[node]])

    return TreeArrays(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        leaf_rows=tuple(members),
    )


def _fit_tree(
    X: np.ndarray, y: np.ndarray, tree: int, bandwidth: float, config: DrfConfig, mtry: int
) -> TreeArrays:
    rng = child_rng(config.seed, _TREE_STREAM, tree)
    n = X.shape[0]
    size = max(1, int(round(config.subsample_fraction * n)))
    rows = np.sort(rng.choice(n, size=size, replace=False))
    return grow_tree(X, y, rows, bandwidth, config, rng, mtry)


def fit_drf(
    response: np.ndarray,
    predictor_table: DatasetTable,
    config: DrfConfig = DrfConfig(),
    target: str = "y",
    predictors: Optional[Sequence[str]] = None,
    workers: Optional[int] = None,
) -> DistributionalForest:
    """Fit a forest for ``response`` given the ``predictors`` columns of ``predictor_table``."""
    predictors = tuple(predictors if predictors is not None else predictor_table.columns)
    if not predictors:
        raise InputError(f"Forest for {target} needs at least one predictor")
    X = predictor_table.matrix(predictors)
    y = np.asarray(response, dtype=float).ravel()
    if y.size != X.shape[0]:
        raise InputError(
            f"Response for {target} has {y.size} rows but the predictors have {X.shape[0]}"
        )
    if not np.all(np.isfinite(y)):
        raise InputError(f"Response for {target} has non-finite values")
    if y.size < 2 * config.min_node_size:
        raise InputError(
            f"Forest for {target} needs at least {2 * config.min_node_size} rows, got {y.size}"
        )

    if config.bandwidth is not None:
        bandwidth = config.bandwidth
    else:
        rng = child_rng(config.seed, _BANDWIDTH_STREAM)
        try:
            bandwidth = median_heuristic_bandwidth(y, config.bandwidth_cap, rng)
        except DegenerateResponseError as exc:
            raise DegenerateResponseError(f"{target}: {exc}") from exc
    mtry = config.mtry or math.ceil(math.sqrt(len(predictors)))

    logger.debug(
        f"Growing {config.num_trees} trees for {target} on {', '.join(predictors)} "
        f"(bandwidth {bandwidth:.4g}, mtry {mtry})"
    )
    trees = Parallel(n_jobs=workers or settings.workers)(
        delayed(_fit_tree)(X, y, t, bandwidth, config, mtry) for t in range(config.num_trees)
    )
    jitter_scale = silverman_bandwidth(y) if config.jitter else 0.0
    return DistributionalForest.assemble(
        target, predictors, y, trees, bandwidth, config, jitter_scale
    )


# ---- weights and sampling ------------------------------------------------


def _query_vector(forest: DistributionalForest, query: Query) -> np.ndarray:
    if isinstance(query, Mapping):
        missing = [p for p in forest.predictors if p not in query]
        if missing:
            raise InputError(
                f"Query for {forest.target} is missing predictors: {', '.join(missing)}"
            )
        x = np.array([query[p] for p in forest.predictors], dtype=float)
    else:
        x = np.asarray(query, dtype=float).ravel()
        if x.size != len(forest.predictors):
            raise InputError(
                f"Query for {forest.target} needs {len(forest.predictors)} values, got {x.size}"
            )
    if not np.all(np.isfinite(x)):
        raise InputError(f"Query for {forest.target} has non-finite values")
    return x


def _query_matrix(forest: DistributionalForest, queries) -> np.ndarray:
    if isinstance(queries, DatasetTable):
        queries.require(forest.predictors)
        return queries.matrix(forest.predictors)
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if Q.shape[1] != len(forest.predictors):
        raise InputError(
            f"Queries for {forest.target} need {len(forest.predictors)} columns, got {Q.shape[1]}"
        )
    if not np.all(np.isfinite(Q)):
        raise InputError(f"Queries for {forest.target} have non-finite values")
    return Q


def _descend(forest: DistributionalForest, node: int, x: np.ndarray) -> int:
    feature, threshold = forest.feature, forest.threshold
    while feature[node] >= 0:
        node = forest.left[node] if x[feature[node]] <= threshold[node] else forest.right[node]
    return int(node)


def route(forest: DistributionalForest, queries: np.ndarray) -> np.ndarray:
    """Leaf id reached in every tree, shape (num_queries, num_trees)."""
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    nodes = np.tile(forest.roots, (Q.shape[0], 1))
    query_index = np.broadcast_to(np.arange(Q.shape[0])[:, None], nodes.shape)
    while True:
        feature = forest.feature[nodes]
        internal = feature >= 0
        if not internal.any():
            return nodes
        at = nodes[internal]
        go_left = Q[query_index[internal], feature[internal]] <= forest.threshold[at]
        nodes[internal] = np.where(go_left, forest.left[at], forest.right[at])


def _accumulate(forest: DistributionalForest, leaves: np.ndarray) -> np.ndarray:
    weights = np.zeros(len(forest.response))
    counts = forest.leaf_count[leaves]
    rows = np.concatenate([forest.leaf_members(leaf) for leaf in leaves])
    np.add.at(weights, rows, np.repeat(1.0 / counts, counts))
    return weights / len(leaves)


def drf_weights(forest: DistributionalForest, query: Query) -> np.ndarray:
    """
    Weight of every training row for ``query``: the average over trees of
    the uniform distribution on the query's leaf.
    """
    x = _query_vector(forest, query)
    return _accumulate(forest, route(forest, x)[0])


def drf_weights_many(forest: DistributionalForest, queries) -> np.ndarray:
    """Weights for a batch of queries, shape (num_queries, num_training_rows)."""
    Q = _query_matrix(forest, queries)
    return np.vstack([_accumulate(forest, leaves) for leaves in route(forest, Q)])


def conditional_mean(forest: DistributionalForest, query: Query) -> float:
    return float(drf_weights(forest, query) @ forest.response)


def conditional_sample(
    forest: DistributionalForest, query: Query, rng: np.random.Generator
) -> float:
    """
    One draw from the weighted point-mass estimate at ``query``.

    Picking a tree uniformly and then a row of its leaf uniformly selects
    row i with exactly the forest weight of i.
    """
    x = _query_vector(forest, query)
    tree = int(rng.integers(forest.num_trees))
    members = forest.leaf_members(_descend(forest, int(forest.roots[tree]), x))
    value = float(forest.response[members[rng.integers(members.size)]])
    if forest.jitter_scale > 0:
        limit = 5 * forest.jitter_scale
        value += float(np.clip(rng.normal(0.0, forest.jitter_scale), -limit, limit))
    return value
