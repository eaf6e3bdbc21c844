import json
import logging
from pathlib import Path
from typing import Generic, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from src.core.exceptions import SchemaError

logger = logging.getLogger(__name__)

T = TypeVar("T", bound=BaseModel)

PathLike = Union[str, Path]


class JsonDocumentRepository(Generic[T]):
    """Reads and writes one pydantic document type as JSON files."""

    def __init__(self, model: Type[T]):
        self.model = model

    def parse(self, payload: Union[str, bytes, dict], source: str = "<memory>") -> T:
        try:
            if isinstance(payload, dict):
                return self.model.model_validate(payload)
            return self.model.model_validate_json(payload)
        except ValidationError as exc:
            raise SchemaError(
                f"{source} is not a valid {self.model.__name__}: {exc.error_count()} error(s)\n{exc}"
            ) from exc

    def read(self, path: PathLike) -> T:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        try:
            json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
        return self.parse(text, source=str(path))

    def write(self, path: PathLike, document: T) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        # non-finite floats are written as null
        path.write_text(document.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.debug(f"Wrote {self.model.__name__} to {path}")
        return path
