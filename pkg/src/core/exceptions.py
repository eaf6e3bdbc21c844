"""
Error hierarchy shared by all services.

Input problems derive from ValueError and numerical failures from
ArithmeticError, so callers that only know the builtin families still
catch them. The CLI maps each family to a process exit code.
"""

from typing import Optional

import numpy as np


class LayerbenchError(Exception):
    """Base class for all errors raised by this package."""


class InputError(LayerbenchError, ValueError):
    """Invalid data, configuration or file contents supplied by the caller."""


class StructuralError(InputError):
    """A graph violates acyclicity, layering or node-set constraints."""


class ExtensionError(StructuralError):
    """A CPDAG admits no consistent DAG extension."""


class SchemaError(InputError):
    """A graph, prior or report document does not match its schema."""


class DegenerateBasisError(InputError):
    """A spline basis cannot be built on a constant column."""


class DegenerateResponseError(InputError):
    """A response column has no spread (e.g. for the median heuristic)."""


class FingerprintMismatchError(InputError):
    """A fitted model is used with a graph or table it was not fit on."""


class ModelFileError(InputError):
    """A model container cannot be parsed."""


class ChecksumError(ModelFileError):
    """A model container section failed its CRC check."""


class TruncatedModelError(ModelFileError):
    """A model container ended before all declared bytes were read."""


class ModelVersionError(ModelFileError):
    def __init__(self, found: int, supported: int):
        self.found = found
        self.supported = supported
        super().__init__(
            f"Model format version {found} is not supported "
            f"(this build reads version {supported})"
        )

    def __reduce__(self):
        return (type(self), (self.found, self.supported))


class NumericalError(LayerbenchError, ArithmeticError):
    """A numerical routine failed (singular system, failed optimisation)."""


class FitError(NumericalError):
    def __init__(self, target: str, message: str):
        self.target = target
        self.detail = message
        super().__init__(f"Fit failed for target '{target}': {message}")

    # worker pools pickle exceptions; rebuild from the original arguments
    def __reduce__(self):
        return (type(self), (self.target, self.detail))


EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def exit_code_for(error: Optional[BaseException]) -> int:
    """Exit code used by the CLI for a given error (None means success)."""
    if error is None:
        return EXIT_OK
    # LinAlgError is a ValueError subclass, so it must be mapped first
    if isinstance(error, (ArithmeticError, np.linalg.LinAlgError)):
        return EXIT_NUMERICAL
    if isinstance(error, (InputError, OSError)):
        return EXIT_INPUT
    # plain ValueErrors from library code are treated as input problems
    if isinstance(error, ValueError):
        return EXIT_INPUT
    return 1
