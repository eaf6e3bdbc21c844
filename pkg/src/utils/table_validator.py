"""
Dataset Table Validator

Checks that a numeric table is usable by the fitting services: required
columns present, equal lengths and only finite values.
"""

from typing import Iterable, Mapping, Optional, Tuple

import numpy as np


class DatasetValidator:
    """Validates column sets and values of real-valued tables."""

    # Cap on how many offending names end up in an error message
    MAX_REPORTED = 10

    @classmethod
    def _format_names(cls, names: list[str]) -> str:
        shown = ", ".join(names[: cls.MAX_REPORTED])
        if len(names) > cls.MAX_REPORTED:
            shown += f", ... ({len(names) - cls.MAX_REPORTED} more)"
        return shown

    @classmethod
    def check_columns(
        cls, available: Iterable[str], required: Iterable[str]
    ) -> Tuple[bool, str]:
        available_set = set(available)
        missing = [name for name in required if name not in available_set]
        if missing:
            return False, f"Missing columns: {cls._format_names(missing)}"
        return True, "OK"

    @classmethod
    def check_values(cls, columns: Mapping[str, np.ndarray]) -> Tuple[bool, str]:
        lengths = {len(values) for values in columns.values()}
        if len(lengths) > 1:
            return False, f"Columns have unequal lengths: {sorted(lengths)}"

        bad = [
            name
            for name, values in columns.items()
            if not np.all(np.isfinite(np.asarray(values, dtype=float)))
        ]
        if bad:
            return False, f"Non-finite values in columns: {cls._format_names(bad)}"
        return True, "OK"

    @classmethod
    def validate(
        cls,
        columns: Mapping[str, np.ndarray],
        required: Optional[Iterable[str]] = None,
    ) -> Tuple[bool, str]:
        """
        Validate a table given as a column mapping.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if required is not None:
            ok, msg = cls.check_columns(columns.keys(), required)
            if not ok:
                return ok, msg
        return cls.check_values(columns)


def validate_table(
    columns: Mapping[str, np.ndarray], required: Optional[Iterable[str]] = None
) -> Tuple[bool, str]:
    """Convenience function to validate a column mapping."""
    return DatasetValidator.validate(columns, required)
