import os
from dotenv import load_dotenv

# Load environment variables FIRST (before pinning test settings)
load_dotenv()

# Single worker keeps failures readable; results do not depend on it
os.environ["LAYERBENCH_WORKERS"] = "1"

from typing import Callable, Optional

import numpy as np
import pytest
from faker import Faker

from src.model.dataset import DatasetTable
from src.model.graph import LayeredDag, PriorKnowledge
from src.schema.config import DrfConfig, PipelineConfig
from src.service.graph import causal_order
from src.utils.seeding import child_rng


def linear_sem(
    dag: LayeredDag,
    n: int,
    seed: int = 0,
    weight: float = 1.0,
    noise: str = "gaussian",
    noise_scale: float = 1.0,
    weights: Optional[dict[tuple[str, str], float]] = None,
) -> DatasetTable:
    """Linear additive-noise data along ``dag``; every edge has ``weight`` unless given."""
    rng = child_rng(seed)
    values: dict[str, np.ndarray] = {}
    for node in causal_order(dag):
        if noise == "uniform":
            column = rng.uniform(-noise_scale, noise_scale, n)
        else:
            column = rng.normal(0.0, noise_scale, n)
        for parent in dag.parents[node]:
            w = (weights or {}).get((parent, node), weight)
            column = column + w * values[parent]
        values[node] = column
    return DatasetTable(dag.nodes, np.column_stack([values[v] for v in dag.nodes]))


@pytest.fixture
def chain_dag() -> LayeredDag:
    """a -> b -> c"""
    return LayeredDag.flat(["a", "b", "c"], [("a", "b"), ("b", "c")])


@pytest.fixture
def toy_dag() -> LayeredDag:
    """Five nodes over two processes: a collider, a fork and a chain."""
    return LayeredDag.from_processes(
        [(1, 1, ["a", "b", "c"]), (2, 2, ["d", "e"])],
        [("a", "c"), ("b", "c"), ("c", "d"), ("c", "e"), ("d", "e")],
    )


@pytest.fixture
def toy_prior(toy_dag: LayeredDag) -> PriorKnowledge:
    prior, _ = PriorKnowledge.from_dag(toy_dag)
    return prior


@pytest.fixture
def sem_sampler() -> Callable[..., DatasetTable]:
    return linear_sem


@pytest.fixture
def small_drf_config() -> DrfConfig:
    return DrfConfig(num_trees=50, min_node_size=5, seed=0)


@pytest.fixture
def small_pipeline_config(small_drf_config: DrfConfig) -> PipelineConfig:
    return PipelineConfig(drf=small_drf_config, seed=0)


@pytest.fixture
def fake() -> Faker:
    faker = Faker()
    faker.seed_instance(1234)
    return faker
