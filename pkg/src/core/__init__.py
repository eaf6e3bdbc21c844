from .config import Settings, settings
from .exceptions import InputError, LayerbenchError, NumericalError

__all__ = ["Settings", "settings", "InputError", "LayerbenchError", "NumericalError"]
