"""
Dataset and Graph Storage Tests

Numeric table validation, CSV round trips and graph JSON documents.
"""

import numpy as np
import pytest

from src.core.exceptions import InputError, SchemaError, StructuralError
from src.model.dataset import DatasetTable
from src.model.graph import MechanismSpec, PriorKnowledge
from src.repository.dataset_store import DatasetRepository
from src.repository.graph_store import CrossEdgeRepository, GraphRepository
from src.utils.table_validator import DatasetValidator, validate_table

pytestmark = [pytest.mark.unit]


class TestDatasetValidator:
    """Column and value checks returning (ok, message)"""

    def test_valid_table(self):
        """A complete finite table passes."""
        ok, msg = validate_table({"a": np.ones(3), "b": np.zeros(3)}, required=["a"])
        assert ok, msg

    def test_missing_columns_listed(self):
        """Every missing column is named."""
        ok, msg = validate_table({"a": np.ones(3)}, required=["a", "b", "c"])
        assert not ok
        assert "b, c" in msg

    def test_long_lists_are_truncated(self):
        """Long lists of missing columns are shortened."""
        ok, msg = DatasetValidator.check_columns([], [f"x{i}" for i in range(15)])
        assert not ok
        assert "5 more" in msg

    def test_unequal_lengths(self):
        """Columns of different lengths are rejected."""
        ok, msg = validate_table({"a": np.ones(3), "b": np.ones(2)})
        assert not ok
        assert "unequal" in msg

    def test_non_finite_values(self):
        """NaN values are rejected."""
        ok, msg = validate_table({"a": np.array([1.0, np.nan])})
        assert not ok
        assert "Non-finite" in msg


class TestDatasetTable:
    """Immutable named-column tables"""

    def test_from_mapping(self):
        """Columns keep their insertion order."""
        table = DatasetTable.from_mapping({"a": [1, 2, 3], "b": [4, 5, 6]})
        assert table.columns == ("a", "b")
        assert table.num_rows == 3
        np.testing.assert_array_equal(table.column("b"), [4.0, 5.0, 6.0])

    def test_values_are_read_only(self):
        """The value matrix cannot be written to."""
        table = DatasetTable.from_mapping({"a": [1.0, 2.0]})
        with pytest.raises(ValueError):
            table.values[0, 0] = 5.0

    def test_non_finite_rejected(self):
        """Infinite values are rejected on construction."""
        with pytest.raises(InputError, match="Non-finite"):
            DatasetTable(("a",), np.array([[1.0], [np.inf]]))

    def test_shape_mismatch_rejected(self):
        """Column names must match the matrix width."""
        with pytest.raises(InputError, match="does not match"):
            DatasetTable(("a", "b"), np.zeros((3, 3)))

    def test_missing_column_rejected(self):
        """Asking for an unknown column raises InputError."""
        table = DatasetTable.from_mapping({"a": [1.0]})
        with pytest.raises(InputError, match="Missing columns: z"):
            table.matrix(["a", "z"])

    def test_select_reorders(self):
        """select returns the columns in the requested order."""
        table = DatasetTable.from_mapping({"a": [1.0, 2.0], "b": [3.0, 4.0]})
        selected = table.select(["b", "a"])
        assert selected.columns == ("b", "a")
        np.testing.assert_array_equal(selected.values[0], [3.0, 1.0])

    def test_standardized_columns(self):
        """z-scores have mean 0 and standard deviation 1."""
        table = DatasetTable.from_mapping({"a": [1.0, 2.0, 3.0, 6.0]})
        z = table.standardized().column("a")
        assert abs(z.mean()) < 1e-12
        assert abs(z.std() - 1.0) < 1e-12

    def test_constant_column_is_centred(self):
        """A constant column stays at zero instead of failing the whole table."""
        table = DatasetTable.from_mapping({"a": [1.0, 2.0], "c": [3.0, 3.0]})
        assert table.constant_columns() == ["c"]
        z = table.standardized()
        np.testing.assert_array_equal(z.column("c"), [0.0, 0.0])
        np.testing.assert_allclose(z.column("a"), [-1.0, 1.0])

    def test_joined_appends_columns(self):
        """Joined tables keep this table's columns first."""
        left = DatasetTable.from_mapping({"a": [1.0, 2.0]})
        right = DatasetTable.from_mapping({"pred__a": [0.5, 1.5]})
        joined = left.joined(right)
        assert joined.columns == ("a", "pred__a")
        np.testing.assert_array_equal(joined.column("pred__a"), [0.5, 1.5])
        with pytest.raises(InputError, match="Cannot join 3 rows onto 2"):
            left.joined(DatasetTable.from_mapping({"b": [1.0, 2.0, 3.0]}))

    def test_fingerprint_tracks_content(self):
        """Equal content gives equal fingerprints, changed values do not."""
        first = DatasetTable.from_mapping({"a": [1.0, 2.0]})
        second = DatasetTable.from_mapping({"a": [1.0, 2.0]})
        third = DatasetTable.from_mapping({"a": [1.0, 3.0]})
        assert first.fingerprint() == second.fingerprint()
        assert first.fingerprint() != third.fingerprint()


class TestDatasetRepository:
    """CSV persistence"""

    def test_round_trip_is_exact(self, tmp_path, fake):
        """Written CSVs read back bit for bit."""
        values = np.array(
            [[fake.pyfloat(min_value=-100, max_value=100) for _ in range(3)] for _ in range(20)]
        )
        table = DatasetTable(("x", "y", "z"), values)
        repository = DatasetRepository()
        path = repository.write(tmp_path / "data.csv", table)
        loaded = repository.read(path)
        assert loaded.columns == table.columns
        np.testing.assert_array_equal(loaded.values, table.values)

    def test_missing_values_rejected(self, tmp_path):
        """Empty cells are an input error."""
        path = tmp_path / "gaps.csv"
        path.write_text("a,b\n1,2\n3,\n")
        with pytest.raises(InputError, match="missing values in columns: b"):
            DatasetRepository().read(path)

    def test_non_numeric_rejected(self, tmp_path):
        """Text cells are an input error."""
        path = tmp_path / "text.csv"
        path.write_text("a,b\n1,two\n")
        with pytest.raises(InputError, match="non-numeric"):
            DatasetRepository().read(path)

    def test_empty_file_rejected(self, tmp_path):
        """A file without content is an input error."""
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(InputError, match="empty"):
            DatasetRepository().read(path)


class TestGraphRepository:
    """Graph, prior and cross-edge JSON documents"""

    def test_dag_round_trip(self, tmp_path, toy_dag):
        """Graph documents read back as the same DAG."""
        repository = GraphRepository()
        path = repository.save_dag(tmp_path / "truth.json", toy_dag)
        assert repository.load_dag(path) == toy_dag

    def test_prior_round_trip_keeps_mechanisms(self, tmp_path, toy_dag):
        """Known mechanisms survive a save and load."""
        prior, _ = PriorKnowledge.from_dag(
            toy_dag,
            mechanisms={"c": MechanismSpec("c", ("a",), "pred__c")},
            process_level_edges=[(1, 2)],
        )
        repository = GraphRepository()
        loaded = repository.load_prior(repository.save_prior(tmp_path / "prior.json", prior))
        assert loaded.union == prior.union
        assert loaded.mechanism("c") == MechanismSpec("c", ("a",), "pred__c")
        assert loaded.process_parents(2) == (1,)

    def test_prior_with_cross_edge_rejected(self, tmp_path, toy_dag):
        """A prior may not contain cross-process edges."""
        repository = GraphRepository()
        path = repository.save_dag(tmp_path / "truth.json", toy_dag)
        with pytest.raises(StructuralError, match="crosses from process"):
            repository.load_prior(path)

    def test_unknown_key_rejected(self, tmp_path):
        """Unknown document keys fail schema validation."""
        path = tmp_path / "bad.json"
        path.write_text('{"processes": [], "colour": "red"}')
        with pytest.raises(SchemaError, match="GraphDocument"):
            GraphRepository().read(path)

    def test_invalid_json_rejected(self, tmp_path):
        """Malformed JSON is a schema error."""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(SchemaError, match="not valid JSON"):
            GraphRepository().read(path)

    def test_cross_edges_round_trip(self, tmp_path):
        """Learned cross edges read back unchanged."""
        repository = CrossEdgeRepository()
        path = repository.save_edges(tmp_path / "edges.json", [("c", "d"), ("a", "e")], seed=4)
        assert repository.load_edges(path) == frozenset({("c", "d"), ("a", "e")})
        assert repository.read(path).seed == 4
