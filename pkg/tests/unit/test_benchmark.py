"""
Benchmark Runner Tests

Per-run datasets, scoring of every algorithm against the truth, the empty
baseline and the summary tables.
"""

import numpy as np
import pytest

from src.core.exceptions import InputError
from src.model.dataset import DatasetTable
from src.model.graph import LayeredDag
from src.repository.graph_store import GraphRepository
from src.schema.config import BenchmarkConfig, DrfConfig, PipelineConfig
from src.service.benchmark import (
    BASELINE,
    config_from_report,
    long_table,
    run_benchmark,
    run_data,
    summary_table,
)
from src.service.discovery.registry import default_registry
from src.service.synth import fit_pipeline
from src.utils.seeding import child_rng

pytestmark = [pytest.mark.unit]


@pytest.fixture
def chain_model(chain_dag, sem_sampler, small_pipeline_config):
    return fit_pipeline(sem_sampler(chain_dag, 300), chain_dag, small_pipeline_config, workers=1)


@pytest.fixture
def small_benchmark() -> BenchmarkConfig:
    return BenchmarkConfig(algorithms=["snr", "lingam"], runs=2, n=80, seed=4)


class TestRunData:
    """Datasets handed to the algorithms"""

    def test_standardized_by_default(self, chain_model, small_benchmark):
        """Each run's data is z-scored unless asked otherwise."""
        data = run_data(chain_model, small_benchmark, 0)
        np.testing.assert_allclose(data.values.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(data.values.std(axis=0), 1.0)

    def test_constant_sampled_column_does_not_abort(self, small_benchmark):
        """A node that only ever takes one value is centred and the run goes on."""
        dag = LayeredDag.flat(["a", "b"])
        rng = child_rng(0)
        data = DatasetTable(("a", "b"), np.column_stack([rng.normal(size=200), np.full(200, 3.0)]))
        model = fit_pipeline(data, dag, PipelineConfig(drf=DrfConfig(num_trees=5)), workers=1)
        standardized = run_data(model, small_benchmark, 0)
        np.testing.assert_array_equal(standardized.column("b"), 0.0)
        assert standardized.column("a").std() == pytest.approx(1.0)

    def test_raw_scale_on_request(self, chain_model, small_benchmark):
        """standardize=False hands the raw samples to the algorithms."""
        config = small_benchmark.model_copy(update={"standardize": False})
        data = run_data(chain_model, config, 0)
        assert abs(data.values.std(axis=0)[2] - 1.0) > 1e-6

    def test_runs_get_different_data(self, chain_model, small_benchmark):
        """Every run draws its own dataset."""
        first = run_data(chain_model, small_benchmark, 0)
        second = run_data(chain_model, small_benchmark, 1)
        assert not np.array_equal(first.values, second.values)


class TestRunBenchmark:
    """Scoring every (algorithm, run) cell"""

    def test_report_covers_every_cell(self, chain_model, chain_dag, small_benchmark):
        """One row per algorithm and run, baseline included."""
        report = run_benchmark(chain_model, chain_dag, small_benchmark, workers=1)
        cells = {(row.algorithm, row.run) for row in report.runs}
        assert cells == {(key, run) for key in ("snr", "lingam", BASELINE) for run in range(2)}
        assert all(row.n == 80 and row.standardized for row in report.runs)

    def test_empty_baseline_scores(self, chain_model, chain_dag, small_benchmark):
        """The empty graph finds nothing, so recall is zero and SHD counts every true edge."""
        report = run_benchmark(chain_model, chain_dag, small_benchmark, workers=1)
        baseline = [row for row in report.runs if row.algorithm == BASELINE]
        for row in baseline:
            assert row.score.shd == 2
            assert row.score.precision_undefined
            assert row.score.recall == 0.0

    def test_same_seed_same_scores(self, chain_model, chain_dag, small_benchmark):
        """A fixed seed reproduces every score."""
        first = run_benchmark(chain_model, chain_dag, small_benchmark, workers=1)
        second = run_benchmark(chain_model, chain_dag, small_benchmark, workers=1)
        assert [r.score for r in first.runs] == [r.score for r in second.runs]
        assert [r.varsortability for r in first.runs] == [r.varsortability for r in second.runs]

    def test_config_is_echoed(self, chain_model, chain_dag, small_benchmark):
        """The report carries the configuration it was run with."""
        report = run_benchmark(chain_model, chain_dag, small_benchmark, workers=1)
        assert config_from_report(report) == small_benchmark

    def test_unknown_algorithm_rejected(self, chain_model, chain_dag):
        """An unregistered key fails before any data is drawn."""
        config = BenchmarkConfig(algorithms=["ges"], runs=1, n=50)
        with pytest.raises(InputError, match="Unknown algorithm 'ges'"):
            run_benchmark(chain_model, chain_dag, config)

    def test_truth_must_match_model(self, chain_model):
        """Truth and model must cover the same nodes."""
        config = BenchmarkConfig(algorithms=["snr"], runs=1, n=50)
        with pytest.raises(InputError, match="different nodes"):
            run_benchmark(chain_model, LayeredDag.flat(["a", "b"]), config)

    def test_imported_results_are_scored(self, tmp_path, chain_model, chain_dag, small_benchmark):
        """Graphs learned elsewhere are scored like built-in algorithms."""
        path = GraphRepository().save_dag(tmp_path / "perfect.json", chain_dag)
        config = small_benchmark.model_copy(
            update={"algorithms": ["perfect"], "imports": {"perfect": str(path)}}
        )
        report = run_benchmark(
            chain_model, chain_dag, config, registry=default_registry(config.imports), workers=1
        )
        perfect = [row for row in report.runs if row.algorithm == "perfect"]
        assert all(row.score.shd == 0 and row.score.f1 == 1.0 for row in perfect)


class TestTables:
    """Long and summary views of a report"""

    def test_long_table_shape(self, chain_model, chain_dag, small_benchmark):
        """One row per run and metric in the long table."""
        report = run_benchmark(chain_model, chain_dag, small_benchmark, workers=1)
        table = long_table(report)
        assert list(table.columns) == ["algorithm", "run", "metric", "value"]
        assert len(table) == len(report.runs) * 4

    def test_summary_per_algorithm_and_metric(self, chain_model, chain_dag, small_benchmark):
        """Summary rows hold per-algorithm statistics of each metric."""
        report = run_benchmark(chain_model, chain_dag, small_benchmark, workers=1)
        summary = summary_table(report)
        assert list(summary.columns) == ["algorithm", "metric", "mean", "median", "std"]
        assert len(summary) == 3 * 4
        shd_row = summary[(summary.algorithm == BASELINE) & (summary.metric == "shd")].iloc[0]
        assert shd_row["mean"] == 2.0
        assert shd_row["std"] == 0.0
