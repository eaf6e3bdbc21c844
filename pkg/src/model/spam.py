from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SplineBasis:
    """
    Cubic (by default) B-spline basis for one predictor.

    Knots and boundary live on the standardized scale of the training
    column; ``mean``/``scale`` map raw values onto it.
    """

    num_basis: int
    degree: int
    knots: np.ndarray
    lower: float
    upper: float
    mean: float
    scale: float

    @property
    def interior_knots(self) -> np.ndarray:
        return self.knots[self.degree + 1 : len(self.knots) - self.degree - 1]


@dataclass(frozen=True)
class SplineGroup:
    predictor: str
    basis: SplineBasis
    # column means of the training design block
    center: np.ndarray
    coefficients: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))


@dataclass(frozen=True)
class SplineAdditiveModel:
    """Fitted sparse additive model for one target."""

    target: str
    groups: tuple[SplineGroup, ...]
    intercept: float
    lam: float
    converged: bool = True
    sweeps: int = 0
    objective: float = float("nan")
    active_tol: float = 1e-8

    @property
    def active_set(self) -> tuple[str, ...]:
        return tuple(g.predictor for g in self.groups if g.norm > self.active_tol)

    @property
    def predictors(self) -> tuple[str, ...]:
        return tuple(g.predictor for g in self.groups)

    def group(self, predictor: str) -> SplineGroup:
        for g in self.groups:
            if g.predictor == predictor:
                return g
        raise KeyError(predictor)


@dataclass(frozen=True)
class CvPath:
    """Cross-validation curve over a descending lambda grid."""

    lambdas: np.ndarray
    mean_mse: np.ndarray
    standard_error: np.ndarray
    lambda_min: float
    lambda_1se: float
    fold_mse: np.ndarray = field(repr=False, default_factory=lambda: np.zeros((0, 0)))
