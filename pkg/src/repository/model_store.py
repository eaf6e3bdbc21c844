"""
Binary container for fitted pipelines.

Layout (little endian)::

    b"LBM1" | uint16 version | uint16 section count
    per section: uint16 name length | name (utf-8) | uint64 payload length
                 | uint32 CRC-32 of payload | payload

The ``meta`` section is JSON; every array is its own ``.npy`` section,
read back without pickling.
"""

import io
import logging
import struct
import zlib
from pathlib import Path
from typing import Mapping

import numpy as np

from src.core.exceptions import (
    ChecksumError,
    ModelFileError,
    ModelVersionError,
    SchemaError,
    TruncatedModelError,
)
from src.model.drf import DistributionalForest
from src.model.pipeline import PipelineModel, SmoothBootstrapSpec
from src.repository.graph_store import dag_to_document, document_to_dag
from src.schema.config import DrfConfig
from src.schema.pipeline import ModelMeta, NodeDescriptor
from .base import JsonDocumentRepository, PathLike

logger = logging.getLogger(__name__)

MAGIC = b"LBM1"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHH")
_NAME_LENGTH = struct.Struct("<H")
_SECTION = struct.Struct("<QI")

_FOREST_ARRAYS = (
    "feature",
    "threshold",
    "left",
    "right",
    "leaf_offset",
    "leaf_count",
    "roots",
    "leaf_rows",
    "response",
)


def _array_bytes(array: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    np.save(buffer, np.ascontiguousarray(array), allow_pickle=False)
    return buffer.getvalue()


def _read_array(payload: bytes, name: str) -> np.ndarray:
    try:
        return np.load(io.BytesIO(payload), allow_pickle=False)
    except (ValueError, OSError, EOFError) as exc:
        raise ModelFileError(f"Section {name} is not a valid array: {exc}") from exc


def pack_sections(sections: Mapping[str, bytes], version: int = FORMAT_VERSION) -> bytes:
    parts = [_HEADER.pack(MAGIC, version, len(sections))]
    for name, payload in sections.items():
        encoded = name.encode("utf-8")
        parts.append(_NAME_LENGTH.pack(len(encoded)))
        parts.append(encoded)
        parts.append(_SECTION.pack(len(payload), zlib.crc32(payload)))
        parts.append(payload)
    return b"".join(parts)


def unpack_sections(blob: bytes) -> dict[str, bytes]:
    """Split a container into named payloads, verifying every checksum."""
    if len(blob) < _HEADER.size:
        raise TruncatedModelError("Model file ends inside its header")
    magic, version, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ModelFileError("Not a model file (bad magic bytes)")
    if version != FORMAT_VERSION:
        raise ModelVersionError(version, FORMAT_VERSION)

    sections: dict[str, bytes] = {}
    offset = _HEADER.size
    for index in range(count):
        if offset + _NAME_LENGTH.size > len(blob):
            raise TruncatedModelError(f"Model file ends before section {index + 1} of {count}")
        (name_length,) = _NAME_LENGTH.unpack_from(blob, offset)
        offset += _NAME_LENGTH.size
        if offset + name_length + _SECTION.size > len(blob):
            raise TruncatedModelError(f"Model file ends inside section {index + 1} header")
        try:
            name = blob[offset : offset + name_length].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelFileError(f"Section {index + 1} has an unreadable name") from exc
        offset += name_length
        length, crc = _SECTION.unpack_from(blob, offset)
        offset += _SECTION.size
        if offset + length > len(blob):
            raise TruncatedModelError(
                f"Section {name} declares {length} bytes, only {len(blob) - offset} remain"
            )
        payload = blob[offset : offset + length]
        offset += length
        if zlib.crc32(payload) != crc:
            raise ChecksumError(f"Checksum mismatch in section {name}")
        sections[name] = payload

    if offset != len(blob):
        raise ModelFileError(f"{len(blob) - offset} unexpected bytes after the last section")
    return sections


class ModelRepository:
    """Reads and writes PipelineModel containers."""

    def __init__(self):
        self.meta_documents = JsonDocumentRepository(ModelMeta)

    def to_bytes(self, model: PipelineModel) -> bytes:
        sections: dict[str, bytes] = {}
        descriptors = []
        for i, node in enumerate(model.dag.nodes):
            if node in model.source_specs:
                spec = model.source_specs[node]
                descriptors.append(
                    NodeDescriptor(node=node, kind="source", bandwidth=spec.bandwidth)
                )
                sections[f"node{i}/values"] = _array_bytes(spec.training_column)
                continue
            forest = model.conditionals[node]
            descriptors.append(
                NodeDescriptor(
                    node=node,
                    kind="forest",
                    bandwidth=forest.bandwidth,
                    predictors=list(forest.predictors),
                    jitter_scale=forest.jitter_scale,
                    drf=forest.config,
                )
            )
            for name in _FOREST_ARRAYS:
                sections[f"node{i}/{name}"] = _array_bytes(getattr(forest, name))

        meta = ModelMeta(
            graph=dag_to_document(model.dag),
            order=list(model.order),
            nodes=descriptors,
            fit_meta=dict(model.fit_meta),
        )
        return pack_sections({"meta": meta.model_dump_json().encode("utf-8"), **sections})

    def from_bytes(self, blob: bytes) -> PipelineModel:
        sections = unpack_sections(blob)
        if "meta" not in sections:
            raise ModelFileError("Model file has no meta section")
        try:
            meta = self.meta_documents.parse(sections["meta"], source="meta section")
        except SchemaError as exc:
            raise ModelFileError(str(exc)) from exc

        def section(name: str) -> np.ndarray:
            if name not in sections:
                raise ModelFileError(f"Model file is missing section {name}")
            return _read_array(sections[name], name)

        dag = document_to_dag(meta.graph)
        sources, forests = {}, {}
        for descriptor in meta.nodes:
            if descriptor.node not in dag.index:
                raise ModelFileError(f"Descriptor for unknown node {descriptor.node}")
            i = dag.index[descriptor.node]
            if descriptor.kind == "source":
                sources[descriptor.node] = SmoothBootstrapSpec(
                    section(f"node{i}/values"), descriptor.bandwidth
                )
                continue
            arrays = {name: section(f"node{i}/{name}") for name in _FOREST_ARRAYS}
            forests[descriptor.node] = DistributionalForest(
                target=descriptor.node,
                predictors=tuple(descriptor.predictors),
                bandwidth=descriptor.bandwidth,
                config=descriptor.drf or DrfConfig(),
                jitter_scale=descriptor.jitter_scale,
                **arrays,
            )
        return PipelineModel(dag, tuple(meta.order), sources, forests, meta.fit_meta)

    def save(self, path: PathLike, model: PipelineModel) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes(model))
        logger.info(f"Saved model with {len(model.dag.nodes)} nodes to {path}")
        return path

    def load(self, path: PathLike) -> PipelineModel:
        path = Path(path)
        try:
            model = self.from_bytes(path.read_bytes())
        except ModelFileError:
            logger.error(f"Cannot read model file {path}")
            raise
        logger.info(f"Loaded model with {len(model.dag.nodes)} nodes from {path}")
        return model


def save_model(model: PipelineModel, path: PathLike) -> Path:
    return ModelRepository().save(path, model)


def load_model(path: PathLike) -> PipelineModel:
    return ModelRepository().load(path)
