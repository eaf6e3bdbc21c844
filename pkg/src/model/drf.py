from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.schema.config import DrfConfig


@dataclass(frozen=True)
class TreeArrays:
    """
    One tree in array form with tree-local node ids. Internal nodes have
    ``feature >= 0`` and send ``x[feature] <= threshold`` to ``left``;
    leaves have ``feature == -1`` and list their training rows.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_rows: tuple[np.ndarray, ...]

    @classmethod
    def single_leaf(cls, rows: Sequence[int]) -> "TreeArrays":
        return cls(
            feature=np.array([-1]),
            threshold=np.array([0.0]),
            left=np.array([-1]),
            right=np.array([-1]),
            leaf_rows=(np.asarray(rows, dtype=np.int64),),
        )


@dataclass(frozen=True, eq=False)
class DistributionalForest:
    """
    Forest over a node's parents. All trees are stored in concatenated
    flat arrays; ``roots[t]`` is the global id of tree t's root and a
    leaf's training rows are ``leaf_rows[leaf_offset[i]: leaf_offset[i] + leaf_count[i]]``.
    """

    target: str
    predictors: tuple[str, ...]
    response: np.ndarray
    bandwidth: float
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_offset: np.ndarray
    leaf_count: np.ndarray
    roots: np.ndarray
    leaf_rows: np.ndarray
    config: DrfConfig = field(default_factory=DrfConfig)
    jitter_scale: float = 0.0

    @classmethod
    def assemble(
        cls,
        target: str,
        predictors: Sequence[str],
        response: np.ndarray,
        trees: Sequence[TreeArrays],
        bandwidth: float,
        config: DrfConfig = DrfConfig(),
        jitter_scale: float = 0.0,
    ) -> "DistributionalForest":
        features, thresholds, lefts, rights = [], [], [], []
        offsets, counts, roots, rows = [], [], [], []
        node_base = 0
        row_base = 0
        for tree in trees:
            size = len(tree.feature)
            roots.append(node_base)
            features.append(np.asarray(tree.feature, dtype=np.int64))
            thresholds.append(np.asarray(tree.threshold, dtype=float))
            left = np.asarray(tree.left, dtype=np.int64)
            right = np.asarray(tree.right, dtype=np.int64)
            lefts.append(np.where(left >= 0, left + node_base, -1))
            rights.append(np.where(right >= 0, right + node_base, -1))
            for node in range(size):
                members = np.asarray(tree.leaf_rows[node], dtype=np.int64)
                if tree.feature[node] < 0:
                    offsets.append(row_base)
                    counts.append(len(members))
                    rows.append(members)
                    row_base += len(members)
                else:
                    offsets.append(-1)
                    counts.append(0)
            node_base += size

        def _cat(parts, dtype):
            return np.concatenate(parts).astype(dtype) if parts else np.zeros(0, dtype=dtype)

        return cls(
            target=target,
            predictors=tuple(predictors),
            response=np.asarray(response, dtype=float).copy(),
            bandwidth=float(bandwidth),
            feature=_cat(features, np.int64),
            threshold=_cat(thresholds, float),
            left=_cat(lefts, np.int64),
            right=_cat(rights, np.int64),
            leaf_offset=np.asarray(offsets, dtype=np.int64),
            leaf_count=np.asarray(counts, dtype=np.int64),
            roots=np.asarray(roots, dtype=np.int64),
            leaf_rows=_cat(rows, np.int64),
            config=config,
            jitter_scale=float(jitter_scale),
        )

    @property
    def num_trees(self) -> int:
        return len(self.roots)

    @property
    def num_nodes(self) -> int:
        return len(self.feature)

    def leaf_members(self, node: int) -> np.ndarray:
        start = self.leaf_offset[node]
        return self.leaf_rows[start : start + self.leaf_count[node]]

    def is_leaf(self, node: int) -> bool:
        return bool(self.feature[node] < 0)
