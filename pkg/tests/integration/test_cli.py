"""
Command-Line Workflow Tests

Runs the commands through ``main`` the way a user chains them: generate the
six-node reference line, learn its cross-process edges, fit a pipeline,
sample from it, check fidelity and benchmark two algorithms.
"""

import json

import numpy as np
import pytest

from main import main
from src.core.exceptions import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK
from src.model.dataset import DatasetTable
from src.model.graph import MechanismSpec, PriorKnowledge
from src.repository.dataset_store import DatasetRepository
from src.repository.graph_store import CrossEdgeRepository, GraphRepository
from src.repository.model_store import ModelRepository
from src.service.refline import toy_line_fixture

pytestmark = [pytest.mark.integration]

SMALL_FOREST = ["--num-trees", "20", "--min-node-size", "5"]


def _scores(path) -> list[dict]:
    return [run["score"] for run in json.loads(path.read_text())["runs"]]


@pytest.fixture
def workspace(tmp_path):
    """Reference data for the six-node line in ``tmp_path``."""
    assert main(["genref", "--fixture", "toy", "--rows", "600", "--out-dir", str(tmp_path)]) == 0
    return tmp_path


@pytest.fixture
def fitted(workspace):
    model = workspace / "model.lbm"
    code = main(
        [
            "fit",
            "--data", str(workspace / "data.csv"),
            "--graph", str(workspace / "truth.json"),
            "--out", str(model),
            "--seed", "1",
            *SMALL_FOREST,
        ]
    )
    assert code == EXIT_OK
    return model


class TestGenref:
    """Reference data on disk"""

    def test_writes_data_truth_and_prior(self, workspace):
        """genref writes the data, truth and prior files."""
        data = DatasetRepository().read(workspace / "data.csv")
        assert data.columns == ("1", "2", "3", "4", "5", "6")
        assert data.num_rows == 600
        truth = GraphRepository().load_dag(workspace / "truth.json")
        assert truth == toy_line_fixture().truth
        prior = GraphRepository().load_prior(workspace / "prior.json")
        assert prior.union.edges == frozenset({("1", "2"), ("2", "3"), ("5", "6")})

    def test_fixture_has_no_prediction_table(self, workspace):
        """The toy line declares no mechanisms, so no prediction file either."""
        assert not (workspace / "predictions.csv").exists()

    def test_same_seed_same_file(self, tmp_path):
        """A fixed seed writes identical files."""
        for name in ("first", "second"):
            args = ["genref", "--fixture", "toy", "--rows", "50", "--seed", "3"]
            assert main([*args, "--out-dir", str(tmp_path / name)]) == 0
        first = (tmp_path / "first" / "data.csv").read_bytes()
        assert first == (tmp_path / "second" / "data.csv").read_bytes()

    def test_configurable_line_keeps_predictions_in_data(self, tmp_path):
        """Prediction columns of known mechanisms sit next to the node columns."""
        config = tmp_path / "line.json"
        line = {
            "station_node_counts": [4, 6],
            "processes_per_station": 2,
            "mechanism_fraction": 1.0,
        }
        config.write_text(json.dumps(line))
        out = tmp_path / "line"
        assert main(["genref", "--config", str(config), "--rows", "30", "--out-dir", str(out)]) == 0
        data = DatasetRepository().read(out / "data.csv")
        truth = GraphRepository().load_dag(out / "truth.json")
        prior = GraphRepository().load_prior(out / "prior.json")
        assert data.num_rows == 30
        assert "Station1_Process1_m01" in data.columns
        assert data.columns[: len(truth.nodes)] == truth.nodes
        expected = tuple(sorted(m.prediction_column for m in prior.mechanisms.values()))
        assert tuple(sorted(data.columns[len(truth.nodes) :])) == expected
        assert not (out / "predictions.csv").exists()

class TestLearnEdges:
    """Cross-process edges and the merged graph"""

    def test_writes_edges_and_merged_truth(self, workspace):
        """Learned edges go forward and the merged graph adds them to the prior."""
        out = workspace / "edges.json"
        code = main(
            [
                "learn-edges",
                "--data", str(workspace / "data.csv"),
                "--prior", str(workspace / "prior.json"),
                "--out", str(out),
            ]
        )
        assert code == 0
        edges = CrossEdgeRepository().load_edges(out)
        merged = GraphRepository().load_dag(workspace / "edges_truth.json")
        prior = GraphRepository().load_prior(workspace / "prior.json")
        assert merged.edges == prior.union.edges | edges
        for u, v in edges:
            assert merged.process_of[u] < merged.process_of[v]

    @pytest.fixture
    def mechanism_prior(self, workspace):
        """Prior of the toy line with a known mechanism 5 -> 6 read from ``pred__6``."""
        prior = GraphRepository().load_prior(workspace / "prior.json")
        mechanisms = {"6": MechanismSpec("6", ("5",), "pred__6")}
        GraphRepository().save_prior(
            workspace / "prior.json", PriorKnowledge(prior.process_graphs, mechanisms)
        )
        data = DatasetRepository().read(workspace / "data.csv")
        x5 = data.column("5")
        return DatasetTable(("pred__6",), x5 + 0.5 * np.sin(2.0 * x5))

    def _learn(self, workspace, *extra) -> int:
        return main(
            [
                "learn-edges",
                "--data", str(workspace / "data.csv"),
                "--prior", str(workspace / "prior.json"),
                "--out", str(workspace / "edges.json"),
                *extra,
            ]
        )

    def test_prediction_column_inside_training_table(self, workspace, mechanism_prior):
        """A pred__ column in data.csv is enough; no separate table is needed."""
        data = DatasetRepository().read(workspace / "data.csv")
        DatasetRepository().write(workspace / "data.csv", data.joined(mechanism_prior))
        assert self._learn(workspace) == EXIT_OK
        merged = GraphRepository().load_dag(workspace / "edges_truth.json")
        assert set(merged.nodes) == {"1", "2", "3", "4", "5", "6"}

    def test_prediction_column_from_extra_table(self, workspace, mechanism_prior):
        """--predictions supplies columns the training table lacks."""
        extra = workspace / "predictions.csv"
        DatasetRepository().write(extra, mechanism_prior)
        assert self._learn(workspace, "--predictions", str(extra)) == EXIT_OK

    def test_missing_prediction_column(self, workspace, mechanism_prior):
        """A needed column found in neither table exits with the input code."""
        assert self._learn(workspace) == EXIT_INPUT
        assert not (workspace / "edges.json").exists()

    def test_missing_data_file(self, workspace):
        """A missing data file exits with an input error."""
        code = main(
            [
                "learn-edges",
                "--data", str(workspace / "missing.csv"),
                "--prior", str(workspace / "prior.json"),
                "--out", str(workspace / "edges.json"),
            ]
        )
        assert code == EXIT_INPUT
        assert not (workspace / "edges.json").exists()


class TestFitAndSample:
    """Model files and the rows drawn from them"""

    def test_model_covers_graph(self, fitted, workspace):
        """The fitted model covers the graph."""
        model = ModelRepository().load(fitted)
        assert model.dag == GraphRepository().load_dag(workspace / "truth.json")
        assert set(model.source_specs) == {"1"}

    def test_sample_is_seeded(self, fitted, workspace):
        """sample is reproducible for a fixed seed."""
        outs = []
        for name, seed in (("a.csv", "5"), ("b.csv", "5"), ("c.csv", "6")):
            out = workspace / name
            code = main(
                [
                    "sample",
                    "--model", str(fitted),
                    "-n", "40",
                    "--out", str(out),
                    "--graph", str(workspace / "truth.json"),
                    "--seed", seed,
                ]
            )
            assert code == 0
            outs.append(DatasetRepository().read(out))
        assert outs[0].num_rows == 40
        np.testing.assert_array_equal(outs[0].values, outs[1].values)
        assert not np.array_equal(outs[0].values, outs[2].values)

    def test_sample_rejects_other_graph(self, fitted, workspace):
        """Sampling against another graph is rejected."""
        other = workspace / "other.json"
        truth = GraphRepository().load_dag(workspace / "truth.json")
        GraphRepository().save_dag(other, truth.with_edges(truth.edges - {("5", "6")}))
        out = str(workspace / "s.csv")
        code = main(["sample", "--model", str(fitted), "-n", "10", "--out", out, "--graph", str(other)])
        assert code == EXIT_INPUT

    def test_damaged_model_is_input_error(self, fitted, workspace):
        """A damaged model file exits with an input error."""
        blob = bytearray(fitted.read_bytes())
        blob[-1] ^= 0xFF
        fitted.write_bytes(bytes(blob))
        out = str(workspace / "s.csv")
        assert main(["sample", "--model", str(fitted), "-n", "5", "--out", out]) == EXIT_INPUT

    def test_per_station_models(self, workspace):
        """--per-station writes one model per station."""
        out = workspace / "cells.lbm"
        code = main(
            [
                "fit",
                "--data", str(workspace / "data.csv"),
                "--graph", str(workspace / "truth.json"),
                "--out", str(out),
                "--cells",
                *SMALL_FOREST,
            ]
        )
        assert code == 0
        # both processes of the six-node line sit on station 1
        assert (workspace / "cells_station1.lbm").exists()
        assert (workspace / "cells_station1.json").exists()

    def test_invalid_forest_size(self, workspace):
        """A forest without trees is rejected before fitting."""
        code = main(
            [
                "fit",
                "--data", str(workspace / "data.csv"),
                "--graph", str(workspace / "truth.json"),
                "--out", str(workspace / "m.lbm"),
                "--num-trees", "0",
            ]
        )
        assert code == EXIT_INPUT


    def test_linear_algebra_failure_is_numerical(self, workspace, monkeypatch):
        """A LinAlgError from fitting exits with the numerical code, not the input code."""

        def singular(*args, **kwargs):
            raise np.linalg.LinAlgError("Singular matrix")

        monkeypatch.setattr("src.api.commands.fit.fit_pipeline", singular)
        code = main(
            [
                "fit",
                "--data", str(workspace / "data.csv"),
                "--graph", str(workspace / "truth.json"),
                "--out", str(workspace / "m.lbm"),
            ]
        )
        assert code == EXIT_NUMERICAL


class TestFidelity:
    """KS report written next to the model"""

    def test_report(self, fitted, workspace):
        """fidelity writes a KS report."""
        out = workspace / "fidelity.json"
        data = str(workspace / "data.csv")
        assert main(["fidelity", "--data", data, "--model", str(fitted), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["rows"] == 600
        assert {entry["node"] for entry in report["nodes"]} == {"1", "2", "3", "4", "5", "6"}
        assert report["non_source"]["num_nodes"] == 5
        ks = [entry["ks"] for entry in report["nodes"]]
        assert ks == sorted(ks, reverse=True)


class TestBenchmark:
    """Benchmark report plus its two tables"""

    def test_report_and_tables(self, fitted, workspace):
        """benchmark writes the report and its tables."""
        out = workspace / "bench.json"
        code = main(
            [
                "benchmark",
                "--data-model", str(fitted),
                "--truth", str(workspace / "truth.json"),
                "--algorithms", "snr,pc",
                "--runs", "2",
                "-n", "100",
                "--seed", "2",
                "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert len(report["runs"]) == 3 * 2
        assert report["config"]["algorithms"] == ["snr", "pc"]
        assert (workspace / "bench_summary.csv").exists()
        assert (workspace / "bench_boxplot.csv").exists()

    def test_rerun_from_report(self, fitted, workspace):
        """A report's config reruns to the same scores."""
        first = workspace / "first.json"
        args = [
            "benchmark",
            "--data-model", str(fitted),
            "--truth", str(workspace / "truth.json"),
            "--algorithms", "snr",
            "--runs", "1",
            "-n", "80",
        ]
        assert main([*args, "--out", str(first)]) == 0
        second = workspace / "second.json"
        assert main(["benchmark", "--from-report", str(first), "--out", str(second)]) == 0
        assert _scores(first) == _scores(second)

    def test_needs_model_and_truth(self, workspace):
        """benchmark needs a model and a truth graph."""
        code = main(["benchmark", "--algorithms", "snr", "--out", str(workspace / "b.json")])
        assert code == EXIT_INPUT

    def test_unknown_algorithm(self, fitted, workspace):
        """An unknown algorithm exits with an input error."""
        code = main(
            [
                "benchmark",
                "--data-model", str(fitted),
                "--truth", str(workspace / "truth.json"),
                "--algorithms", "ges",
                "--out", str(workspace / "b.json"),
            ]
        )
        assert code == EXIT_INPUT
