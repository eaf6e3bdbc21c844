import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from src.core.exceptions import InputError, NumericalError
from src.model.dataset import DatasetTable

logger = logging.getLogger(__name__)

_RIDGE = 1e-10
# keeps the z-transform finite for |r| == 1
_R_LIMIT = 1.0 - 1e-15


@dataclass(frozen=True)
class CiTestResult:
    statistic: float
    p_value: float
    independent: bool
    alpha: float


def _inverse(matrix: np.ndarray) -> np.ndarray:
    for ridge in (0.0, _RIDGE):
        try:
            inverse = np.linalg.inv(matrix + ridge * np.eye(len(matrix)))
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(inverse)):
            if ridge:
                logger.debug(f"Correlation submatrix needed a ridge of {ridge:g}")
            return inverse
    raise NumericalError("Correlation submatrix is singular")


def partial_correlation(corr: np.ndarray) -> float:
    """Partial correlation of the first two variables given the rest."""
    if len(corr) == 2:
        return float(corr[0, 1])
    precision = _inverse(corr)
    return float(-precision[0, 1] / np.sqrt(precision[0, 0] * precision[1, 1]))


class FisherZTest:
    """
    Fisher-z conditional independence test on a fixed data matrix.

    The correlation matrix is computed once; each query inverts only the
    submatrix of the variables involved.
    """

    def __init__(self, values: np.ndarray, alpha: float = 0.05):
        values = np.asarray(values, dtype=float)
        self.n, self.p = values.shape
        self.alpha = alpha
        with np.errstate(invalid="ignore", divide="ignore"):
            corr = np.corrcoef(values, rowvar=False)
        corr = np.atleast_2d(corr)
        if not np.all(np.isfinite(corr)):
            raise NumericalError("Correlation matrix is undefined (constant column?)")
        self.corr = corr

    def test(self, i: int, j: int, s: Sequence[int] = ()) -> CiTestResult:
        s = list(s)
        if i == j or i in s or j in s:
            raise InputError("Tested variables must be distinct and outside the conditioning set")
        dof = self.n - len(s) - 3
        if dof <= 0:
            raise InputError(
                f"Fisher-z needs more than {len(s) + 3} rows, got {self.n}"
            )
        idx = [i, j] + s
        r = partial_correlation(self.corr[np.ix_(idx, idx)])
        r = float(np.clip(r, -_R_LIMIT, _R_LIMIT))
        z = 0.5 * np.log((1.0 + r) / (1.0 - r))
        statistic = float(np.sqrt(dof) * abs(z))
        p_value = float(min(1.0, 2.0 * stats.norm.sf(statistic)))
        return CiTestResult(statistic, p_value, p_value > self.alpha, self.alpha)

    def __call__(self, i: int, j: int, s: Sequence[int] = ()) -> bool:
        return self.test(i, j, s).independent


def fisher_z_test(
    data: DatasetTable, i: str, j: str, s: Iterable[str] = (), alpha: float = 0.05
) -> CiTestResult:
    """Fisher-z test of ``i`` independent of ``j`` given ``s`` on named columns."""
    s = list(s)
    names = [i, j] + s
    tester = FisherZTest(data.matrix(names), alpha=alpha)
    return tester.test(0, 1, list(range(2, len(names))))
