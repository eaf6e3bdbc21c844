import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from src.core.exceptions import InputError
from src.utils.table_validator import DatasetValidator


@dataclass(frozen=True, eq=False)
class DatasetTable:
    """
    Named-column table of real-valued samples. Rows are units, columns are
    variables bound to DAG nodes. The value matrix is read-only.
    """

    columns: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        columns = tuple(str(c) for c in self.columns)
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1 and len(columns) == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[1] != len(columns):
            raise InputError(
                f"Value matrix of shape {values.shape} does not match {len(columns)} columns"
            )
        if len(set(columns)) != len(columns):
            raise InputError("Duplicate column names")
        ok, msg = DatasetValidator.check_values(
            {name: values[:, i] for i, name in enumerate(columns)}
        )
        if not ok:
            raise InputError(msg)
        values.setflags(write=False)
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Iterable[float]]) -> "DatasetTable":
        names = list(data)
        arrays = [np.asarray(data[n], dtype=float).ravel() for n in names]
        lengths = {len(a) for a in arrays}
        if len(lengths) > 1:
            raise InputError(f"Columns have unequal lengths: {sorted(lengths)}")
        matrix = np.column_stack(arrays) if arrays else np.zeros((0, 0))
        return cls(tuple(names), matrix)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "DatasetTable":
        try:
            matrix = frame.to_numpy(dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputError(f"Table contains non-numeric values: {exc}") from exc
        return cls(tuple(str(c) for c in frame.columns), matrix)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(np.array(self.values), columns=list(self.columns))

    @property
    def num_rows(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.num_rows

    def __contains__(self, name: object) -> bool:
        return name in self.columns

    def position(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise InputError(f"Missing columns: {name}") from None

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.position(name)]

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        """Copy of the columns ``names`` as a (rows x len(names)) array."""
        self.require(names)
        return self.values[:, [self.columns.index(n) for n in names]].copy()

    def require(self, names: Iterable[str]) -> None:
        ok, msg = DatasetValidator.check_columns(self.columns, names)
        if not ok:
            raise InputError(msg)

    def select(self, names: Sequence[str]) -> "DatasetTable":
        return DatasetTable(tuple(names), self.matrix(names))

    def joined(self, other: "DatasetTable") -> "DatasetTable":
        """Columns of this table followed by those of ``other``, row by row."""
        if other.num_rows != self.num_rows:
            raise InputError(f"Cannot join {other.num_rows} rows onto {self.num_rows}")
        return DatasetTable(self.columns + other.columns, np.hstack([self.values, other.values]))

    def take_rows(self, rows: np.ndarray) -> "DatasetTable":
        return DatasetTable(self.columns, self.values[np.asarray(rows)])

    def constant_columns(self) -> list[str]:
        return [c for c, s in zip(self.columns, self.values.std(axis=0)) if s == 0]

    def standardized(self) -> "DatasetTable":
        """
        Per-column z-scores using this table's own mean and standard deviation.
        Constant columns are only centred, which leaves them at zero.
        """
        mean = self.values.mean(axis=0)
        scale = self.values.std(axis=0)
        scale[scale == 0] = 1.0
        return DatasetTable(self.columns, (self.values - mean) / scale)

    def fingerprint(self) -> str:
        """Hash of column names, row count and per-column mean/sd."""
        summary = {
            "columns": list(self.columns),
            "rows": self.num_rows,
            "mean": [format(v, ".12g") for v in self.values.mean(axis=0)] if self.num_rows else [],
            "sd": [format(v, ".12g") for v in self.values.std(axis=0)] if self.num_rows else [],
        }
        payload = json.dumps(summary, sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()

    def __repr__(self) -> str:
        return f"DatasetTable(rows={self.num_rows}, columns={len(self.columns)})"
