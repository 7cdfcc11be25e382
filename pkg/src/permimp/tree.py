"""Single CART-style regression trees with per-node feature subspacing.

Trees are grown on an in-bag sample, splitting where the within-node variance
reduction is largest. Growth is best-first so an optional leaf budget
``max_leaves`` truncates the tree at its most valuable splits. The recursive
:class:`TreeNode` view is the public structure; an array-backed
:class:`FlatTree` twin backs the fast batch kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .datagen import RegressionDataset
from .errors import InvalidInputError, InvalidParameterError
from .randomness import ResampleRecord, SeedSpec

DEFAULT_MIN_LEAF = 5


def default_v_try(p: int) -> int:
    """max(1, p // 3), the usual regression subspacing default."""
    return max(1, p // 3)


@dataclass(frozen=True)
class TreeParams:
    v_try: Optional[int] = None  # None -> max(1, p // 3) at fit time
    min_leaf_size: int = DEFAULT_MIN_LEAF
    max_leaves: Optional[int] = None

    def resolve(self, p: int) -> "TreeParams":
        v_try = self.v_try if self.v_try is not None else default_v_try(p)
        resolved = TreeParams(v_try=v_try, min_leaf_size=self.min_leaf_size,
                              max_leaves=self.max_leaves)
        resolved.validate(p)
        return resolved

    def validate(self, p: int) -> None:
        if self.v_try is not None and not (1 <= self.v_try <= p):
            raise InvalidParameterError(
                f"v_try must lie in [1, p] (got v_try={self.v_try}, p={p})"
            )
        if self.min_leaf_size < 1:
            raise InvalidParameterError(f"min_leaf_size must be >= 1, got {self.min_leaf_size}")
        if self.max_leaves is not None and self.max_leaves < 1:
            raise InvalidParameterError(f"max_leaves must be >= 1, got {self.max_leaves}")

    def to_dict(self) -> dict:
        return {
            "v_try": self.v_try,
            "min_leaf_size": self.min_leaf_size,
            "max_leaves": self.max_leaves,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeParams":
        return cls(v_try=(None if d.get("v_try") is None else int(d["v_try"])),
                   min_leaf_size=int(d["min_leaf_size"]),
                   max_leaves=(None if d.get("max_leaves") is None else int(d["max_leaves"])))


@dataclass
class TreeNode:
    """Recursive tree node: internal (feature, threshold, children) or leaf (mean, count).

    Routing convention: x goes left iff x[feature] < threshold, right otherwise,
    so a point exactly on the threshold routes right. Feature indices are
    0-based column positions.
    """

    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    mean: Optional[float] = None
    count: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"mean": self.mean, "count": self.count}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "mean" in d:
            return cls(mean=float(d["mean"]), count=int(d["count"]))
        return cls(
            feature=int(d["feature"]),
            threshold=float(d["threshold"]),
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )

    def n_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.n_leaves() + self.right.n_leaves()


class FlatTree:
    """Array-backed tree used by the batch kernels; mirrors a TreeNode exactly."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "count")

    def __init__(self, feature, threshold, left, right, value, count):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self.count = count

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def predict_rows(self, X: np.ndarray) -> np.ndarray:
        return _kernels.predict_rows(self.feature, self.threshold, self.left,
                                     self.right, self.value,
                                     np.ascontiguousarray(X, dtype=float))

    def to_node(self, node: int = 0) -> TreeNode:
        if self.feature[node] == _kernels.NO_FEATURE:
            return TreeNode(mean=float(self.value[node]), count=int(self.count[node]))
        return TreeNode(
            feature=int(self.feature[node]),
            threshold=float(self.threshold[node]),
            left=self.to_node(int(self.left[node])),
            right=self.to_node(int(self.right[node])),
            mean=None,
            count=int(self.count[node]),
        )

    @classmethod
    def from_node(cls, root: TreeNode) -> "FlatTree":
        feature, threshold, left, right, value, count = [], [], [], [], [], []

        def visit(node: TreeNode) -> int:
            i = len(feature)
            feature.append(_kernels.NO_FEATURE)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            count.append(node.count)
            if node.is_leaf:
                value[i] = float(node.mean)
            else:
                feature[i] = int(node.feature)
                threshold[i] = float(node.threshold)
                left[i] = visit(node.left)
                right[i] = visit(node.right)
            return i

        visit(root)
        return cls(
            np.asarray(feature, dtype=np.int64),
            np.asarray(threshold, dtype=float),
            np.asarray(left, dtype=np.int64),
            np.asarray(right, dtype=np.int64),
            np.asarray(value, dtype=float),
            np.asarray(count, dtype=np.int64),
        )


def _draw_subspaces(rng: np.random.Generator, p: int, v_try: int, rows: int) -> np.ndarray:
    """Pre-draw one uniform v_try-subset of features per prospective node.

    Sorting each row ascending makes the smallest-feature tie-break a plain
    first-win scan inside the kernel.
    """
    if v_try >= p:
        return np.tile(np.arange(p, dtype=np.int64), (rows, 1))
    keys = rng.random((rows, p))
    subsets = np.argsort(keys, axis=1)[:, :v_try].astype(np.int64)
    subsets.sort(axis=1)
    return np.ascontiguousarray(subsets)


def _node_capacity(m: int, min_leaf: int, max_leaves: Optional[int]) -> int:
    leaves = max(1, m // max(1, min_leaf))
    if max_leaves is not None:
        leaves = min(leaves, max_leaves)
    return 2 * leaves + 1


def grow_flat(record: ResampleRecord, params: TreeParams, data: RegressionDataset,
              seed: SeedSpec) -> FlatTree:
    """Grow the array-backed tree for one resampling record."""
    params = params.resolve(data.p)
    if record.in_bag.size == 0:
        raise InvalidParameterError("in-bag sample is empty")
    Xb = np.ascontiguousarray(data.features[record.in_bag])
    yb = np.ascontiguousarray(data.response[record.in_bag])
    m = Xb.shape[0]
    capacity = _node_capacity(m, params.min_leaf_size, params.max_leaves)
    subspaces = _draw_subspaces(seed.rng(), data.p, params.v_try, capacity)
    max_leaves = 0 if params.max_leaves is None else params.max_leaves
    arrays = _kernels.grow_kernel(Xb, yb, subspaces, params.min_leaf_size, max_leaves)
    return FlatTree(*arrays)


def grow_tree(record: ResampleRecord, params: TreeParams, data: RegressionDataset,
              seed: SeedSpec) -> TreeNode:
    """Grow a tree on the record's in-bag sample; always returns at least a root leaf."""
    return grow_flat(record, params, data, seed).to_node()


def best_split(indices: np.ndarray, candidates: np.ndarray, data: RegressionDataset,
               min_leaf_size: int = DEFAULT_MIN_LEAF):
    """Best (feature, threshold, gain) over the given rows and candidate features.

    Returns None when no admissible split strictly reduces the within-node sum
    of squares (pure node, too few points, or all candidate values tied).
    """
    indices = np.asarray(indices, dtype=np.int64)
    candidates = np.sort(np.asarray(candidates, dtype=np.int64))
    if candidates.size == 0:
        return None
    if candidates.min() < 0 or candidates.max() >= data.p:
        raise InvalidInputError("candidate feature index out of range")
    f, z, gain = _kernels.best_split_slice(
        data.features, data.response, indices, 0, indices.size,
        candidates, min_leaf_size,
    )
    if f == _kernels.NO_FEATURE:
        return None
    return int(f), float(z), float(gain)


def predict_tree(tree: TreeNode, x: np.ndarray) -> float:
    """Leaf mean of the unique cell containing x."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError("predict_tree expects a single point")
    node = tree
    while not node.is_leaf:
        if node.feature >= x.size:
            raise InvalidInputError(
                f"point has {x.size} coordinates but the tree splits on feature {node.feature}"
            )
        node = node.left if x[node.feature] < node.threshold else node.right
    return float(node.mean)
