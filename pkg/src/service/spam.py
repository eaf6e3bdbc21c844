"""
Sparse additive models with B-spline components and their use for
learning cross-process edges.

Each predictor is expanded into a centered spline block, and the block is
re-parameterized so that its columns are orthonormal on the fitting rows.
In that parameterization the group penalty equals the empirical L2 norm of
the component function, and every block update of the coordinate descent
is an exact group soft-threshold.
"""

import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.interpolate import BSpline

from src.core.config import settings
from src.core.exceptions import (
    DegenerateBasisError,
    FitError,
    InputError,
    NumericalError,
)
from src.model.dataset import DatasetTable
from src.model.graph import Edge, PriorKnowledge
from src.model.spam import CvPath, SplineAdditiveModel, SplineBasis, SplineGroup
from src.schema.config import SpamConfig
from src.service.graph import causal_order
from src.utils.seeding import child_seed, child_rng

logger = logging.getLogger(__name__)

# relative singular-value cutoff when orthonormalizing a block
_RANK_TOL = 1e-10


# ---- basis ---------------------------------------------------------------


def build_basis(column: np.ndarray, num_basis: int = 6, degree: int = 3) -> SplineBasis:
    """Spline basis for ``column`` with interior knots at its empirical quantiles."""
    x = np.asarray(column, dtype=float)
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise InputError("Spline basis needs a non-empty finite column")
    num_interior = num_basis - degree - 1
    if num_interior < 0:
        raise InputError(f"num_basis must be at least degree + 1 = {degree + 1}")
    scale = float(x.std())
    if scale == 0:
        raise DegenerateBasisError("Cannot build a spline basis on a constant column")
    mean = float(x.mean())
    z = (x - mean) / scale
    lower, upper = float(z.min()), float(z.max())

    probs = np.arange(1, num_interior + 1) / (num_interior + 1)
    interior = np.quantile(z, probs)
    # heavy ties can collapse quantiles; fall back to even spacing
    if num_interior and (
        np.any(np.diff(interior) <= 0) or interior[0] <= lower or interior[-1] >= upper
    ):
        interior = lower + probs * (upper - lower)

    knots = np.concatenate(
        [np.full(degree + 1, lower), interior, np.full(degree + 1, upper)]
    )
    return SplineBasis(num_basis, degree, knots, lower, upper, mean, scale)


def spline_design(column: np.ndarray, basis: SplineBasis) -> np.ndarray:
    """
    Design block (rows x num_basis) of ``column``. Values outside the
    training range are clamped to the boundary.
    """
    x = np.asarray(column, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InputError("Spline inputs must be finite")
    z = (x - basis.mean) / basis.scale
    # the upper boundary is evaluated as the limit from the left
    z = np.clip(z, basis.lower, np.nextafter(basis.upper, basis.lower))
    return BSpline.design_matrix(z, basis.knots, basis.degree).toarray()


# ---- design preparation ------------------------------------------------------


@dataclass
class _Expansion:
    names: list[str]
    bases: list[SplineBasis]
    blocks: list[np.ndarray]


@dataclass
class _Orthonormal:
    centers: list[np.ndarray]
    transforms: list[np.ndarray]
    slices: list[slice]

    @property
    def width(self) -> int:
        return self.slices[-1].stop if self.slices else 0

    def transform(self, blocks: Sequence[np.ndarray], rows: np.ndarray) -> np.ndarray:
        parts = [
            (block[rows] - center) @ T
            for block, center, T in zip(blocks, self.centers, self.transforms)
        ]
        if not parts:
            return np.zeros((int(np.sum(rows)) if rows.dtype == bool else len(rows), 0))
        return np.hstack(parts)


def _expand(predictors: Mapping[str, np.ndarray], config: SpamConfig) -> _Expansion:
    names, bases, blocks = [], [], []
    for name, column in predictors.items():
        basis = build_basis(column, config.num_basis, config.degree)
        names.append(name)
        bases.append(basis)
        blocks.append(spline_design(column, basis))
    return _Expansion(names, bases, blocks)


def _orthonormalize(blocks: Sequence[np.ndarray], rows: np.ndarray) -> _Orthonormal:
    centers, transforms, slices = [], [], []
    start = 0
    for block in blocks:
        sub = block[rows]
        n = sub.shape[0]
        center = sub.mean(axis=0)
        _, S, Vt = np.linalg.svd(sub - center, full_matrices=False)
        keep = S > _RANK_TOL * S[0] if S.size and S[0] > 0 else np.zeros(S.shape, dtype=bool)
        T = Vt[keep].T * (np.sqrt(n) / S[keep])
        centers.append(center)
        transforms.append(T)
        slices.append(slice(start, start + T.shape[1]))
        start += T.shape[1]
    return _Orthonormal(centers, transforms, slices)


def _objective(theta, G, c, y_sq, lam, slices) -> float:
    penalty = sum(np.linalg.norm(theta[s]) for s in slices)
    return float(y_sq - 2 * theta @ c + theta @ G @ theta + lam * penalty)


def _block_descent(
    G: np.ndarray,
    c: np.ndarray,
    y_sq: float,
    slices: Sequence[slice],
    lam: float,
    theta: np.ndarray,
    config: SpamConfig,
) -> tuple[np.ndarray, int, bool, float]:
    """Cyclic group soft-thresholding; returns (theta, sweeps, converged, objective)."""
    theta = theta.copy()
    objective = _objective(theta, G, c, y_sq, lam, slices)
    for sweep in range(1, config.max_sweeps + 1):
        max_change = 0.0
        for s in slices:
            if s.stop == s.start:
                continue
            z = c[s] - G[s] @ theta + theta[s]
            norm = float(np.linalg.norm(z))
            if norm > lam / 2:
                updated = (1.0 - lam / (2.0 * norm)) * z
            else:
                updated = np.zeros_like(z)
            max_change = max(max_change, float(np.max(np.abs(updated - theta[s]))))
            theta[s] = updated

        if settings.debug:
            current = _objective(theta, G, c, y_sq, lam, slices)
            if current > objective + 1e-10 * max(1.0, abs(objective)):
                raise NumericalError(
                    f"Objective increased in sweep {sweep}: {objective!r} -> {current!r}"
                )
            objective = current

        if max_change < config.tol:
            return theta, sweep, True, _objective(theta, G, c, y_sq, lam, slices)
    return theta, config.max_sweeps, False, _objective(theta, G, c, y_sq, lam, slices)


def _sufficient_statistics(Q: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    n = len(y)
    return Q.T @ Q / n, Q.T @ y / n, float(y @ y / n)


def _lambda_max(c: np.ndarray, slices: Sequence[slice]) -> float:
    return max((2.0 * float(np.linalg.norm(c[s])) for s in slices), default=0.0)


def _validate_inputs(y: np.ndarray, predictors: Mapping[str, np.ndarray]) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InputError("Response contains non-finite values")
    for name, column in predictors.items():
        column = np.asarray(column, dtype=float)
        if column.shape != y.shape:
            raise InputError(f"Predictor {name} has {column.shape[0]} rows, response has {y.shape[0]}")
        if not np.all(np.isfinite(column)):
            raise InputError(f"Predictor {name} contains non-finite values")
    return y


# ---- fitting ----------------------------------------------------------------


def fit_group_sparse(
    y: np.ndarray,
    predictors: Mapping[str, np.ndarray],
    config: Optional[SpamConfig] = None,
    lam: float = 0.0,
    target: str = "y",
) -> SplineAdditiveModel:
    """Minimize mean squared residual + lam * sum of component L2 norms."""
    config = config or SpamConfig()
    if lam < 0:
        raise InputError(f"lambda must be non-negative, got {lam}")
    y = _validate_inputs(y, predictors)
    n = len(y)
    if n < 10 * config.num_basis:
        raise InputError(f"Need at least {10 * config.num_basis} rows, got {n}")

    intercept = float(y.mean())
    yc = y - intercept
    expansion = _expand(predictors, config)
    rows = np.arange(n)
    ortho = _orthonormalize(expansion.blocks, rows)
    Q = ortho.transform(expansion.blocks, rows)
    G, c, y_sq = _sufficient_statistics(Q, yc)

    theta, sweeps, converged, objective = _block_descent(
        G, c, y_sq, ortho.slices, lam, np.zeros(ortho.width), config
    )
    if not converged:
        logger.warning(
            f"Group-sparse fit for {target} did not converge in {sweeps} sweeps "
            f"(lambda={lam:.4g})"
        )

    groups = tuple(
        SplineGroup(
            predictor=name,
            basis=basis,
            center=center,
            coefficients=T @ theta[s],
        )
        for name, basis, center, T, s in zip(
            expansion.names, expansion.bases, ortho.centers, ortho.transforms, ortho.slices
        )
    )
    return SplineAdditiveModel(
        target=target,
        groups=groups,
        intercept=intercept,
        lam=float(lam),
        converged=converged,
        sweeps=sweeps,
        objective=objective,
        active_tol=config.active_tol,
    )


def predict(model: SplineAdditiveModel, predictors: Mapping[str, np.ndarray]) -> np.ndarray:
    """intercept + sum over active groups of the fitted component functions."""
    active = set(model.active_set)
    result = None
    for group in model.groups:
        if group.predictor not in active:
            continue
        design = spline_design(predictors[group.predictor], group.basis)
        part = (design - group.center) @ group.coefficients
        result = part if result is None else result + part
    if result is None:
        any_column = next(iter(predictors.values()), np.zeros(0))
        return np.full(len(any_column), model.intercept)
    return model.intercept + result


def lambda_grid(
    y: np.ndarray, predictors: Mapping[str, np.ndarray], config: Optional[SpamConfig] = None
) -> np.ndarray:
    """Descending log grid from the smallest lambda with an empty model."""
    config = config or SpamConfig()
    y = _validate_inputs(y, predictors)
    return _grid(_expand(predictors, config), y, config)


def _grid(expansion: _Expansion, y: np.ndarray, config: SpamConfig) -> np.ndarray:
    rows = np.arange(len(y))
    ortho = _orthonormalize(expansion.blocks, rows)
    _, c, _ = _sufficient_statistics(ortho.transform(expansion.blocks, rows), y - y.mean())
    lam_max = _lambda_max(c, ortho.slices)
    if lam_max == 0:
        return np.zeros(1)
    return np.geomspace(lam_max, config.lambda_min_ratio * lam_max, config.num_lambdas)


def cv_lambda_path(
    y: np.ndarray,
    predictors: Mapping[str, np.ndarray],
    config: Optional[SpamConfig] = None,
    seed: int = 0,
) -> CvPath:
    """K-fold cross-validated MSE along the lambda grid (warm-started)."""
    config = config or SpamConfig()
    y = _validate_inputs(y, predictors)
    n = len(y)
    k = config.num_folds
    if n < k * config.min_rows_per_fold:
        raise InputError(
            f"Cross-validation with {k} folds needs at least "
            f"{k * config.min_rows_per_fold} rows, got {n}"
        )

    expansion = _expand(predictors, config)
    grid = _grid(expansion, y, config)

    fold_of = np.empty(n, dtype=int)
    fold_of[child_rng(seed).permutation(n)] = np.arange(n) % k

    fold_mse = np.zeros((k, len(grid)))
    for fold in range(k):
        train = fold_of != fold
        test = ~train
        ortho = _orthonormalize(expansion.blocks, train)
        Q_train = ortho.transform(expansion.blocks, train)
        Q_test = ortho.transform(expansion.blocks, test)
        offset = float(y[train].mean())
        G, c, y_sq = _sufficient_statistics(Q_train, y[train] - offset)
        theta = np.zeros(ortho.width)
        for i, lam in enumerate(grid):
            theta, _, converged, _ = _block_descent(G, c, y_sq, ortho.slices, lam, theta, config)
            if not converged:
                logger.debug(f"CV fold {fold} did not converge at lambda={lam:.4g}")
            residual = y[test] - offset - Q_test @ theta
            fold_mse[fold, i] = float(np.mean(residual**2))

    mean_mse = fold_mse.mean(axis=0)
    standard_error = fold_mse.std(axis=0, ddof=1) / np.sqrt(k)
    best = int(np.argmin(mean_mse))
    within = np.flatnonzero(mean_mse <= mean_mse[best] + standard_error[best])
    return CvPath(
        lambdas=grid,
        mean_mse=mean_mse,
        standard_error=standard_error,
        lambda_min=float(grid[best]),
        lambda_1se=float(grid[within[0]]),
        fold_mse=fold_mse,
    )


def cv_select_lambda(
    y: np.ndarray,
    predictors: Mapping[str, np.ndarray],
    config: Optional[SpamConfig] = None,
    seed: int = 0,
) -> float:
    config = config or SpamConfig()
    path = cv_lambda_path(y, predictors, config, seed)
    return path.lambda_1se if config.lambda_choice == "1se" else path.lambda_min


# ---- cross-process edge learning -------------------------------------------


@dataclass(frozen=True)
class TargetTask:
    target: str
    process: int
    predictors: tuple[str, ...]
    mechanism_column: Optional[str]
    seed: int


def plan_targets(prior: PriorKnowledge, seed: int = 0, naive: bool = False) -> list[TargetTask]:
    """
    One regression per node of processes 2..K. The predictor set is every
    node of the earlier processes (or of the process-level parents when a
    process-level graph is given), plus the node's known parents when no
    mechanism accounts for them. ``naive`` leaves the known parents out.
    """
    union = prior.union
    order = causal_order(union)
    tasks = []
    for node in order:
        t = union.process_of[node]
        if t == 1:
            continue
        process_parents = prior.process_parents(t)
        if process_parents is None:
            candidates = list(union.nodes_before(t))
        else:
            allowed = set(process_parents)
            candidates = [n for n in union.nodes if union.process_of[n] in allowed]
        mechanism = prior.mechanism(node)
        if mechanism is None and not naive:
            candidates += [p for p in union.parents[node] if p not in candidates]
        tasks.append(
            TargetTask(
                target=node,
                process=t,
                predictors=tuple(candidates),
                mechanism_column=mechanism.prediction_column if mechanism else None,
                seed=child_seed(seed, union.index[node]),
            )
        )
    return tasks


def _fit_target(
    task: TargetTask,
    response: np.ndarray,
    predictors: dict[str, np.ndarray],
    config: SpamConfig,
) -> SplineAdditiveModel:
    try:
        usable = {}
        for name, column in predictors.items():
            if np.ptp(column) == 0:
                logger.warning(f"Dropping constant predictor {name} for target {task.target}")
                continue
            usable[name] = column
        if not usable or np.ptp(response) == 0:
            return SplineAdditiveModel(task.target, (), float(np.mean(response)), 0.0)
        lam = cv_select_lambda(response, usable, config, seed=task.seed)
        model = fit_group_sparse(response, usable, config, lam, target=task.target)
        logger.debug(
            f"Target {task.target}: lambda={lam:.4g}, active={list(model.active_set)}"
        )
        return model
    except FitError:
        raise
    except NumericalError as exc:
        raise FitError(task.target, str(exc)) from exc
    except InputError as exc:
        raise InputError(f"Target '{task.target}': {exc}") from exc


def fit_cross_process_models(
    data: DatasetTable,
    prior: PriorKnowledge,
    config: Optional[SpamConfig] = None,
    seed: int = 0,
    naive: bool = False,
    predictions: Optional[DatasetTable] = None,
    workers: Optional[int] = None,
) -> dict[str, SplineAdditiveModel]:
    """Fitted additive model per target of processes 2..K."""
    config = config or SpamConfig()
    data.require(prior.union.nodes)
    tasks = plan_targets(prior, seed=seed, naive=naive)

    needed = sorted({t.mechanism_column for t in tasks if t.mechanism_column})
    if predictions is not None and predictions.num_rows != data.num_rows:
        raise InputError(
            f"Prediction table has {predictions.num_rows} rows, data has {data.num_rows}"
        )
    # an extra prediction table wins over same-named columns of the training table
    sources = {
        name: predictions if predictions is not None and name in predictions else data
        for name in needed
    }
    missing = [name for name, table in sources.items() if name not in table]
    if missing:
        raise InputError(f"Missing prediction columns: {', '.join(missing)}")

    def response_of(task: TargetTask) -> np.ndarray:
        y = data.column(task.target)
        if task.mechanism_column:
            return y - sources[task.mechanism_column].column(task.mechanism_column)
        return y.copy()

    logger.info(f"Fitting {len(tasks)} cross-process targets (naive={naive})")
    models = Parallel(n_jobs=workers or settings.workers)(
        delayed(_fit_target)(
            task,
            response_of(task),
            {name: data.column(name).copy() for name in task.predictors},
            config,
        )
        for task in tasks
    )
    return {task.target: model for task, model in zip(tasks, models)}


def learn_cross_process_edges(
    data: DatasetTable,
    prior: PriorKnowledge,
    config: Optional[SpamConfig] = None,
    seed: int = 0,
    naive: bool = False,
    predictions: Optional[DatasetTable] = None,
    workers: Optional[int] = None,
) -> frozenset[Edge]:
    """
    Cross-process edges (l, k) for every predictor l selected for target k
    that lies in an earlier process than k.
    """
    models = fit_cross_process_models(data, prior, config, seed, naive, predictions, workers)
    process_of = prior.union.process_of
    edges = frozenset(
        (source, target)
        for target, model in models.items()
        for source in model.active_set
        if process_of[source] < process_of[target]
    )
    logger.info(f"Learned {len(edges)} cross-process edges")
    return edges
