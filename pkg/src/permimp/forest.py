"""Forest training, prediction, OOB estimates, and signal-to-noise estimation.

A trained :class:`ForestModel` keeps every tree's resampling record, so
out-of-bag predictions, the residual variance estimator, and permutation
importance can be computed without a held-out set. Averages reduce in fixed
tree/observation order: refits and reloads are bit-stable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .datagen import RegressionDataset
from .errors import (
    DegenerateResidualsError,
    InsufficientOobError,
    InvalidInputError,
    InvalidParameterError,
    NeverOobError,
    WrongDatasetError,
)
from .randomness import (
    WITH_REPLACEMENT,
    WITHOUT_REPLACEMENT,
    ResampleRecord,
    SeedSpec,
    bootstrap_with_replacement,
    default_subsample_size,
    subsample_without_replacement,
)
from .tree import FlatTree, TreeNode, TreeParams, grow_flat

log = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForestParams:
    """Ensemble hyper-parameters; None fields resolve to data-dependent defaults."""

    m_trees: int
    scheme: str = WITHOUT_REPLACEMENT
    a_n: Optional[int] = None  # None -> ceil(2n/3); ignored for with-replacement
    tree: Optional[TreeParams] = None  # None -> v_try = max(1, p//3), min leaf 5

    def resolve(self, n: int, p: int) -> "ForestParams":
        if self.m_trees < 1:
            raise InvalidParameterError(f"m_trees must be >= 1, got {self.m_trees}")
        if self.scheme not in (WITHOUT_REPLACEMENT, WITH_REPLACEMENT):
            raise InvalidParameterError(f"unknown sampling scheme: {self.scheme!r}")
        a_n = self.a_n
        if self.scheme == WITHOUT_REPLACEMENT:
            if a_n is None:
                a_n = default_subsample_size(n)
            if not (1 <= a_n < n):
                raise InvalidParameterError(
                    f"a_n must satisfy 1 <= a_n < n (got a_n={a_n}, n={n})"
                )
        tree = (self.tree if self.tree is not None else TreeParams()).resolve(p)
        return ForestParams(m_trees=self.m_trees, scheme=self.scheme, a_n=a_n, tree=tree)

    def to_dict(self) -> dict:
        return {
            "m_trees": self.m_trees,
            "scheme": self.scheme,
            "a_n": self.a_n,
            "tree": None if self.tree is None else self.tree.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestParams":
        return cls(
            m_trees=int(d["m_trees"]),
            scheme=d["scheme"],
            a_n=None if d.get("a_n") is None else int(d["a_n"]),
            tree=None if d.get("tree") is None else TreeParams.from_dict(d["tree"]),
        )


class ForestModel:
    """Trained ensemble: flat trees, per-tree resampling records, provenance."""

    def __init__(self, flat_trees: list[FlatTree], records: list[ResampleRecord],
                 params: ForestParams, n: int, p: int, train_fingerprint: str,
                 seed: SeedSpec, data: RegressionDataset | None = None):
        if len(flat_trees) != len(records):
            raise InvalidParameterError("one resampling record is required per tree")
        self.flat_trees = flat_trees
        self.records = records
        self.params = params
        self.n = n
        self.p = p
        self.train_fingerprint = train_fingerprint
        self.seed = seed
        self.data = data  # training data reference; not serialized
        self._trees: list[TreeNode] | None = None
        self._oob_sums: np.ndarray | None = None
        self._oob_counts: np.ndarray | None = None

    @property
    def m_trees(self) -> int:
        return len(self.flat_trees)

    @property
    def trees(self) -> list[TreeNode]:
        """Recursive TreeNode views, built lazily from the flat arrays."""
        if self._trees is None:
            self._trees = [ft.to_node() for ft in self.flat_trees]
        return self._trees

    @property
    def gamma_n(self) -> Optional[int]:
        """OOB size per tree; fixed n - a_n under subsampling, else None."""
        if self.params.scheme == WITHOUT_REPLACEMENT:
            return self.n - self.params.a_n
        return None

    def check_data(self, data: RegressionDataset) -> None:
        if data.fingerprint() != self.train_fingerprint:
            raise WrongDatasetError(
                "dataset fingerprint does not match the data this forest was trained on"
            )


def fit_forest(data: RegressionDataset, params: ForestParams, seed: SeedSpec) -> ForestModel:
    """Train m_trees trees, tree t drawing its resample and growth from substream t."""
    resolved = params.resolve(data.n, data.p)
    flat_trees: list[FlatTree] = []
    records: list[ResampleRecord] = []
    for t in range(resolved.m_trees):
        if resolved.scheme == WITHOUT_REPLACEMENT:
            rec = subsample_without_replacement(data.n, resolved.a_n, seed.child("resample", t))
        else:
            rec = bootstrap_with_replacement(data.n, seed.child("resample", t))
        flat_trees.append(grow_flat(rec, resolved.tree, data, seed.child("grow", t)))
        records.append(rec)
    return ForestModel(flat_trees, records, resolved, data.n, data.p,
                       data.fingerprint(), seed, data=data)


def predict(model: ForestModel, x: np.ndarray) -> float | np.ndarray:
    """Average of the tree predictions at x; accepts a point (p,) or rows (m, p)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != model.p:
        raise InvalidInputError(f"point dimension {x.shape} does not match model p={model.p}")
    acc = np.zeros(X.shape[0])
    for ft in model.flat_trees:
        acc += ft.predict_rows(X)
    acc /= model.m_trees
    return float(acc[0]) if single else acc


def _oob_accumulate(model: ForestModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-observation sums of OOB tree predictions and OOB tree counts."""
    if model._oob_sums is None:
        if model.data is None:
            raise InvalidInputError("forest carries no training data; reattach it first")
        sums = np.zeros(model.n)
        counts = np.zeros(model.n, dtype=np.int64)
        X = model.data.features
        for ft, rec in zip(model.flat_trees, model.records):
            preds = ft.predict_rows(X[rec.oob])
            sums[rec.oob] += preds
            counts[rec.oob] += 1
        model._oob_sums = sums
        model._oob_counts = counts
    return model._oob_sums, model._oob_counts


def oob_counts(model: ForestModel) -> np.ndarray:
    """Z_i = number of trees for which observation i was out of bag."""
    counts = np.zeros(model.n, dtype=np.int64)
    for rec in model.records:
        counts[rec.oob] += 1
    return counts


def predict_oob(model: ForestModel, i: int) -> float:
    """OOB prediction for training index i: mean over the trees that omitted i."""
    if not (0 <= i < model.n):
        raise InvalidInputError(f"index {i} outside [0, {model.n})")
    sums, counts = _oob_accumulate(model)
    if counts[i] == 0:
        raise NeverOobError(f"observation {i} was in-bag in all {model.m_trees} trees")
    return float(sums[i] / counts[i])


def oob_predictions(model: ForestModel) -> tuple[np.ndarray, np.ndarray]:
    """(predictions, usable mask); predictions are NaN where Z_i = 0."""
    sums, counts = _oob_accumulate(model)
    usable = counts > 0
    preds = np.full(model.n, np.nan)
    preds[usable] = sums[usable] / counts[usable]
    return preds, usable


def oob_mse(model: ForestModel, data: RegressionDataset | None = None) -> float:
    """Mean squared OOB prediction error over observations with Z_i >= 1."""
    data = _use_data(model, data)
    preds, usable = oob_predictions(model)
    if usable.sum() < 1:
        raise InsufficientOobError("no observation was ever out of bag")
    resid = data.response[usable] - preds[usable]
    return float(np.mean(resid**2))


def residual_variance(model: ForestModel, data: RegressionDataset | None = None) -> float:
    """Population-style variance of centered OOB residuals (never-OOB rows excluded)."""
    data = _use_data(model, data)
    preds, usable = oob_predictions(model)
    n_usable = int(usable.sum())
    if n_usable < 2:
        raise InsufficientOobError(
            f"need at least 2 observations with OOB predictions, have {n_usable}"
        )
    skipped = model.n - n_usable
    if skipped:
        log.warning("residual variance skips %d never-OOB observation(s)", skipped)
    resid = data.response[usable] - preds[usable]
    return float(np.var(resid))


def sn_estimate(model: ForestModel, data: RegressionDataset | None = None) -> float:
    """|var(Y) - residual variance| / residual variance."""
    data = _use_data(model, data)
    sigma2_rf = residual_variance(model, data)
    if sigma2_rf == 0.0:
        raise DegenerateResidualsError("OOB residuals are constant; SN ratio undefined")
    sigma2_y = float(np.var(data.response, ddof=1))
    return abs(sigma2_y - sigma2_rf) / sigma2_rf


def _use_data(model: ForestModel, data: RegressionDataset | None) -> RegressionDataset:
    if data is None:
        if model.data is None:
            raise InvalidInputError("forest carries no training data; pass the dataset")
        return model.data
    model.check_data(data)
    if model.data is None:
        model.data = data
    return data


# ---------------------------------------------------------------------------
# Serialization


def model_to_dict(model: ForestModel) -> dict:
    return {
        "version": MODEL_FORMAT_VERSION,
        "params": model.params.to_dict(),
        "seed": model.seed.to_dict(),
        "n": model.n,
        "p": model.p,
        "train_fingerprint": model.train_fingerprint,
        "records": [rec.to_dict() for rec in model.records],
        "trees": [ft.to_node().to_dict() for ft in model.flat_trees],
    }


def save_model(model: ForestModel, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def model_from_dict(d: dict) -> ForestModel:
    if int(d.get("version", -1)) != MODEL_FORMAT_VERSION:
        raise InvalidInputError(f"unsupported model format version: {d.get('version')!r}")
    flat_trees = [FlatTree.from_node(TreeNode.from_dict(t)) for t in d["trees"]]
    records = [ResampleRecord.from_dict(r) for r in d["records"]]
    return ForestModel(
        flat_trees=flat_trees,
        records=records,
        params=ForestParams.from_dict(d["params"]),
        n=int(d["n"]),
        p=int(d["p"]),
        train_fingerprint=d["train_fingerprint"],
        seed=SeedSpec.from_dict(d["seed"]),
    )


def load_model(path: str | Path, data: RegressionDataset | None = None) -> ForestModel:
    """Load a model envelope; optionally reattach (and verify) its training data."""
    with open(path) as fh:
        model = model_from_dict(json.load(fh))
    if data is not None:
        model.check_data(data)
        model.data = data
    return model
