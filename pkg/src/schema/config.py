"""
Algorithm configuration models.

Defaults follow the settings used for the published benchmark; every
model forbids unknown keys so typos in config files fail loudly.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SpamConfig(_Config):
    num_basis: int = Field(default=6, ge=2)
    degree: int = Field(default=3, ge=1)
    num_folds: int = Field(default=5, ge=2)
    cv_loss: Literal["mse"] = "mse"
    lambda_choice: Literal["1se", "min"] = "1se"
    num_lambdas: int = Field(default=50, ge=2)
    lambda_min_ratio: float = Field(default=1e-3, gt=0, lt=1)
    min_rows_per_fold: int = Field(default=20, ge=1)
    tol: float = Field(default=1e-6, gt=0)
    max_sweeps: int = Field(default=500, ge=1)
    active_tol: float = Field(default=1e-8, ge=0)

    @model_validator(mode="after")
    def check_basis_size(self) -> "SpamConfig":
        if self.num_basis < self.degree + 1:
            raise ValueError(
                f"num_basis ({self.num_basis}) must be at least degree + 1 ({self.degree + 1})"
            )
        return self


class DrfConfig(_Config):
    num_trees: int = Field(default=2000, ge=1)
    min_node_size: int = Field(default=15, ge=2)
    num_fourier_features: int = Field(default=50, ge=1)
    mtry: Optional[int] = Field(default=None, ge=1)
    subsample_fraction: float = Field(default=0.5, gt=0, le=1)
    bandwidth: Optional[float] = Field(default=None, gt=0)
    bandwidth_cap: int = Field(default=1000, ge=2)
    max_candidates: int = Field(default=20, ge=1)
    splitting_rule: Literal["FourierMMD"] = "FourierMMD"
    jitter: bool = False
    seed: int = 0


class PipelineConfig(_Config):
    drf: DrfConfig = Field(default_factory=DrfConfig)
    seed: int = 0


class LineConfig(_Config):
    station_node_counts: list[int] = Field(default_factory=lambda: [6, 34, 16, 26, 16])
    processes_per_station: int = Field(default=2, ge=1)
    within_process_edge_density: float = Field(default=0.3, gt=0, le=1)
    cross_edge_density: float = Field(default=0.05, ge=0, le=1)
    mechanism_family: Literal["linear", "spline-nonlinear", "mixed"] = "spline-nonlinear"
    noise_family: Literal["gaussian", "uniform", "mixed"] = "mixed"
    mechanism_fraction: float = Field(default=0.1, ge=0, le=1)
    rows: int = Field(default=15581, ge=1)
    seed: int = 0

    @field_validator("station_node_counts")
    @classmethod
    def check_counts(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("station_node_counts must not be empty")
        if any(c < 1 for c in value):
            raise ValueError("station node counts must be positive")
        return value

    @model_validator(mode="after")
    def check_processes_fit(self) -> "LineConfig":
        small = [c for c in self.station_node_counts if c < self.processes_per_station]
        if small:
            raise ValueError(
                f"Stations with {small} nodes cannot hold "
                f"{self.processes_per_station} processes each"
            )
        return self

    @property
    def total_nodes(self) -> int:
        return sum(self.station_node_counts)


class PcConfig(_Config):
    alpha: float = Field(default=0.05, gt=0, lt=1)
    ci_test: Literal["fisherz"] = "fisherz"
    max_cond_size: Optional[int] = Field(default=None, ge=0)


class LingamConfig(_Config):
    num_alphas: int = Field(default=30, ge=2)
    # maximum-entropy approximation constants
    k1: float = 79.047
    k2: float = 7.4129
    gamma: float = 0.37457


class NotearsConfig(_Config):
    lambda_1: float = Field(default=0.1, ge=0)
    loss_type: Literal["l2"] = "l2"
    max_iter: int = Field(default=100, ge=1)
    h_tol: float = Field(default=1e-8, gt=0)
    rho_max: float = Field(default=1e16, gt=0)
    w_threshold: float = Field(default=0.3, ge=0)
    inner_max_iter: int = Field(default=1000, ge=1)
    inner_tol: float = Field(default=1e-10, gt=0)


class SortnregressConfig(_Config):
    num_alphas: int = Field(default=30, ge=2)


class BenchmarkConfig(_Config):
    algorithms: list[str] = Field(default_factory=lambda: ["pc", "lingam", "notears", "snr"])
    runs: int = Field(default=100, ge=1)
    n: int = Field(default=500, ge=2)
    standardize: bool = True
    seed: int = 0
    model_path: Optional[str] = None
    truth_path: Optional[str] = None
    imports: dict[str, str] = Field(default_factory=dict)
    pc: PcConfig = Field(default_factory=PcConfig)
    lingam: LingamConfig = Field(default_factory=LingamConfig)
    notears: NotearsConfig = Field(default_factory=NotearsConfig)
    snr: SortnregressConfig = Field(default_factory=SortnregressConfig)

    @field_validator("algorithms")
    @classmethod
    def check_algorithms(cls, value: list[str]) -> list[str]:
        if not value:
            raise ValueError("at least one algorithm is required")
        if len(set(value)) != len(value):
            raise ValueError("algorithm keys must be unique")
        return value
