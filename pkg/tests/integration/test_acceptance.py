"""
Seeded Statistical Acceptance Tests

Slow end-to-end checks of the statistical promises: cross-process edge
recovery on the six-node line, Markov samples, forest conditional means and
conditional CDFs, varsortability before and after standardization,
DirectLiNGAM on a non-Gaussian chain, NOTEARS on raw-scale data and
station-level pipelines on a generated line.

Run with ``pytest -m slow``.
"""

import itertools
import json

import numpy as np
import pytest

from main import main
from src.model.dataset import DatasetTable
from src.model.graph import LayeredDag
from src.schema.config import DrfConfig, LineConfig, PipelineConfig
from src.service.benchmark import BASELINE
from src.service.discovery.citest import fisher_z_test
from src.service.discovery.lingam import direct_lingam
from src.service.discovery.notears import notears_linear
from src.service.drf import conditional_mean, drf_weights, fit_drf
from src.service.graph import causal_order, d_separated
from src.service.metrics import shd, varsortability
from src.service.refline import generate_line, toy_line_fixture
from src.service.spam import learn_cross_process_edges
from src.service.synth import fidelity_report, fit_cell_pipelines, fit_pipeline, sample
from src.utils.seeding import child_rng

pytestmark = [pytest.mark.integration, pytest.mark.slow]

TOY_CROSS_EDGES = frozenset({("2", "4"), ("3", "5")})


def local_markov_statements(dag: LayeredDag) -> list[tuple[str, str, tuple[str, ...]]]:
    """(x, y, parents of y) for every non-adjacent x earlier in the causal order."""
    order = causal_order(dag)
    statements = []
    for i, j in itertools.combinations(range(len(order)), 2):
        x, y = order[i], order[j]
        if dag.has_edge(x, y) or dag.has_edge(y, x):
            continue
        statements.append((x, y, tuple(sorted(dag.parents[y]))))
    return statements


class TestCrossProcessEdges:
    """Sparse additive models on the six-node line"""

    SEEDS = range(20)

    def test_recovers_true_cross_edges(self):
        """Known parents in the predictor sets give exactly the true cross edges."""
        fixture = toy_line_fixture()
        exact = 0
        for seed in self.SEEDS:
            data = fixture.sample(2000, seed=seed)
            edges = learn_cross_process_edges(data, fixture.prior, seed=seed, workers=1)
            exact += edges == TOY_CROSS_EDGES
        assert exact >= 0.9 * len(self.SEEDS)

    def test_naive_predictors_add_spurious_edge(self):
        """Leaving known parents out lets 3 stand in for 5 as a parent of 6."""
        fixture = toy_line_fixture()
        spurious = 0
        for seed in self.SEEDS:
            data = fixture.sample(2000, seed=seed)
            edges = learn_cross_process_edges(
                data, fixture.prior, seed=seed, naive=True, workers=1
            )
            spurious += ("3", "6") in edges
        assert spurious > len(self.SEEDS) / 2

    def test_independent_processes_give_no_edges(self):
        """Two mutually independent processes yield no cross edges."""
        prior = toy_line_fixture().prior
        empty = 0
        for seed in range(50):
            rng = child_rng(50, seed)
            x1, x4, *noise = rng.normal(size=(6, 2000))
            x2 = np.tanh(x1) + 0.5 * noise[0]
            x3 = np.sin(1.5 * x2) + 0.5 * noise[1]
            x5 = 0.5 * noise[2]
            x6 = x5 + 0.5 * np.sin(2.0 * x5) + 0.5 * noise[3]
            data = DatasetTable(
                ("1", "2", "3", "4", "5", "6"), np.column_stack([x1, x2, x3, x4, x5, x6])
            )
            empty += not learn_cross_process_edges(data, prior, seed=seed, workers=1)
        assert empty >= 48


class TestMarkovSamples:
    """Implied conditional independencies hold in sampled data"""

    REPLICATIONS = 50
    ALPHA = 0.01

    def test_vanishing_partial_correlations(self, toy_dag, sem_sampler):
        """Per-statement Fisher-z rejections stay inside the binomial 3-sigma band."""
        statements = local_markov_statements(toy_dag)
        assert statements
        for x, y, cond in statements:
            assert d_separated(toy_dag, {x}, {y}, set(cond))

        config = PipelineConfig(drf=DrfConfig(num_trees=100, min_node_size=10), seed=0)
        rejections = {statement: 0 for statement in statements}
        for rep in range(self.REPLICATIONS):
            model = fit_pipeline(
                sem_sampler(toy_dag, 2000, seed=rep),
                toy_dag,
                config.model_copy(update={"seed": rep}),
                workers=1,
            )
            synthetic = sample(model, 5000, child_rng(rep, 1))
            for statement in statements:
                x, y, cond = statement
                rejections[statement] += not fisher_z_test(
                    synthetic, x, y, list(cond), alpha=self.ALPHA
                ).independent
        n, p = self.REPLICATIONS, self.ALPHA
        band = n * p + 3 * np.sqrt(n * p * (1 - p))
        assert max(rejections.values()) <= band, rejections

    def test_fidelity_of_toy_pipeline(self, chain_dag, sem_sampler):
        """Synthetic marginals of a fitted chain stay close to the training data."""
        data = sem_sampler(chain_dag, 5000, seed=11)
        config = PipelineConfig(drf=DrfConfig(num_trees=100, min_node_size=10), seed=1)
        model = fit_pipeline(data, chain_dag, config, workers=1)
        report = fidelity_report(data, model, 5000, child_rng(12))
        assert report.non_source.max < 0.1


class TestForestConditionalMean:
    """Weighted response mean against the analytic conditional mean"""

    @pytest.fixture(scope="class")
    def additive_forest(self):
        rng = child_rng(20)
        n = 5000
        predictor = rng.uniform(-1.5, 1.5, n)
        response = predictor + rng.normal(0.0, 0.2, n)
        table = DatasetTable(("x",), predictor[:, None])
        return fit_drf(
            response, table, DrfConfig(num_trees=500, min_node_size=15, seed=3), workers=1
        )

    @pytest.mark.parametrize("x", [-1.0, -0.5, 0.0, 0.5, 1.0])
    def test_additive_gaussian_noise(self, additive_forest, x):
        """E[y | x] = x is recovered within 0.15."""
        assert conditional_mean(additive_forest, {"x": x}) == pytest.approx(x, abs=0.15)


class TestForestIndependentResponse:
    """Conditional CDFs collapse to the marginal when y does not depend on x"""

    def test_weighted_cdf_matches_marginal(self):
        """Average KS distance to the marginal CDF over 20 queries stays below 0.1."""
        rng = child_rng(21)
        n = 5000
        X = rng.normal(size=(n, 2))
        y = rng.normal(size=n)
        forest = fit_drf(
            y,
            DatasetTable(("x1", "x2"), X),
            DrfConfig(num_trees=200, min_node_size=20, seed=4),
            workers=1,
        )
        order = np.argsort(y)
        marginal = np.arange(1, n + 1) / n
        queries = child_rng(22).normal(size=(20, 2))
        distances = [
            float(np.max(np.abs(np.cumsum(drf_weights(forest, q)[order]) - marginal)))
            for q in queries
        ]
        assert np.mean(distances) < 0.1


class TestVarsortability:
    """Marginal variances along a unit-weight chain"""

    NODES = [f"x{i}" for i in range(10)]
    SEEDS = range(20)

    def test_raw_chain_is_varsortable(self, sem_sampler):
        """Raw-scale variances grow along the chain."""
        chain = LayeredDag.flat(self.NODES, list(zip(self.NODES, self.NODES[1:])))
        for seed in self.SEEDS:
            data = sem_sampler(chain, 10000, seed=seed)
            assert varsortability(data, chain) >= 0.94

    def test_standardization_removes_the_signal(self, sem_sampler):
        """z-scored data carries no ordering information."""
        chain = LayeredDag.flat(self.NODES, list(zip(self.NODES, self.NODES[1:])))
        for seed in self.SEEDS:
            data = sem_sampler(chain, 10000, seed=seed).standardized()
            assert 0.35 <= varsortability(data, chain) <= 0.65


class TestDirectLingam:
    """Chain with uniform noise"""

    def test_recovers_chain(self, chain_dag, sem_sampler):
        """A three-node chain is found exactly in at least 95 of 100 seeds."""
        hits = sum(
            shd(chain_dag, direct_lingam(sem_sampler(chain_dag, 5000, seed=s, noise="uniform"))) == 0
            for s in range(100)
        )
        assert hits >= 95


class TestNotearsRawScale:
    """NOTEARS on unstandardized linear data"""

    def test_five_node_sem(self, sem_sampler):
        """SHD at most 1 in at least 80 of 100 random five-node graphs."""
        nodes = [f"v{i}" for i in range(5)]
        good = 0
        for seed in range(100):
            rng = child_rng(60, seed)
            edges = [
                (nodes[i], nodes[j])
                for i in range(5)
                for j in range(i + 1, 5)
                if rng.random() < 0.4
            ]
            dag = LayeredDag.flat(nodes, edges)
            weights = {edge: float(rng.uniform(0.8, 1.2)) for edge in edges}
            data = sem_sampler(dag, 1000, seed=seed, weights=weights)
            good += shd(dag, notears_linear(data).to_dag()) <= 1
        assert good >= 80


class TestStationPipelines:
    """One model per station of a generated line"""

    def test_station_graphs(self):
        """Each station model covers its nodes and keeps only within-station edges."""
        line = generate_line(LineConfig(rows=300, seed=5))
        config = PipelineConfig(drf=DrfConfig(num_trees=10, min_node_size=5), seed=0)
        models = fit_cell_pipelines(
            line.data, line.prior, config, line.truth.cross_process_edges, workers=1
        )
        sizes = {station: len(model.dag.nodes) for station, model in models.items()}
        assert sizes == {1: 6, 2: 34, 3: 16, 4: 26, 5: 16}
        for station, model in models.items():
            expected = line.truth.restrict(line.truth.station_nodes(station))
            assert model.dag.edges == expected.edges


class TestEndToEnd:
    """genref -> learn-edges -> fit -> sample -> benchmark on a small line"""

    def test_workflow_and_rerun(self, tmp_path):
        """Every command succeeds and a rerun from the report scores identically."""
        line = tmp_path / "line.json"
        line.write_text(LineConfig(station_node_counts=[4, 6, 5], rows=600).model_dump_json())
        assert main(["genref", "--config", str(line), "--out-dir", str(tmp_path)]) == 0

        learn = [
            "learn-edges",
            "--data", str(tmp_path / "data.csv"),
            "--prior", str(tmp_path / "prior.json"),
            "--out", str(tmp_path / "edges.json"),
        ]
        assert main(learn) == 0

        truth = tmp_path / "edges_truth.json"
        model = tmp_path / "model.lbm"
        fit = ["fit", "--data", str(tmp_path / "data.csv"), "--graph", str(truth), "--out", str(model)]
        assert main([*fit, "--num-trees", "20", "--min-node-size", "5"]) == 0
        assert main(["sample", "--model", str(model), "-n", "100", "--out", str(tmp_path / "s.csv")]) == 0

        report = tmp_path / "bench.json"
        bench = ["benchmark", "--data-model", str(model), "--truth", str(truth)]
        assert main([*bench, "--algorithms", "snr,pc", "--runs", "3", "-n", "150", "--out", str(report)]) == 0
        rerun = tmp_path / "rerun.json"
        assert main(["benchmark", "--from-report", str(report), "--out", str(rerun)]) == 0

        runs = json.loads(report.read_text())["runs"]
        assert {run["algorithm"] for run in runs} == {"snr", "pc", BASELINE}
        rerun_runs = json.loads(rerun.read_text())["runs"]
        assert [r["score"] for r in runs] == [r["score"] for r in rerun_runs]
        assert [r["varsortability"] for r in runs] == [r["varsortability"] for r in rerun_runs]
