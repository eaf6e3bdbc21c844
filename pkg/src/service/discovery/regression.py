import logging

import numpy as np
from sklearn.linear_model import lasso_path

logger = logging.getLogger(__name__)

_ZERO = 1e-12


def lasso_bic(X: np.ndarray, y: np.ndarray, num_alphas: int = 30) -> np.ndarray:
    """
    Sparse linear regression of ``y`` on the columns of ``X``.

    Runs a lasso path over ``num_alphas`` penalties (log-spaced from the
    smallest penalty giving the empty model down to 1e-3 of it) on
    standardized predictors. Each distinct support is refit by least
    squares and scored with BIC = n log(RSS/n) + |S| log n; the support
    with the lowest score wins, ties going to the sparser model.

    Returns least-squares coefficients on the chosen support (zeros elsewhere)
    on the original scale of ``X``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    coef = np.zeros(k)
    if k == 0 or n < 2:
        return coef

    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    scale = Xc.std(axis=0)
    usable = scale > 0
    if not np.any(usable):
        return coef
    Z = Xc[:, usable] / scale[usable]

    alpha_max = float(np.max(np.abs(Z.T @ yc)) / n)
    if alpha_max <= 0:
        return coef
    alphas = np.geomspace(alpha_max, 1e-3 * alpha_max, num_alphas)
    _, path, _ = lasso_path(Z, yc, alphas=alphas)

    best_support: tuple[int, ...] = ()
    best_bic = n * np.log(max(float(yc @ yc), _ZERO) / n)
    best_beta = np.zeros(0)
    seen: set[tuple[int, ...]] = {()}
    for column in path.T:
        support = tuple(np.flatnonzero(np.abs(column) > _ZERO))
        if support in seen:
            continue
        seen.add(support)
        beta, *_ = np.linalg.lstsq(Z[:, list(support)], yc, rcond=None)
        residual = yc - Z[:, list(support)] @ beta
        rss = max(float(residual @ residual), _ZERO)
        bic = n * np.log(rss / n) + len(support) * np.log(n)
        if bic < best_bic:
            best_support, best_bic, best_beta = support, bic, beta

    usable_index = np.flatnonzero(usable)
    for position, beta in zip(best_support, best_beta):
        original = usable_index[position]
        coef[original] = beta / scale[original]
    return coef
