"""Out-of-bag permutation importance with derangement-restricted permutations.

For every tree and feature, the OOB rows' j-th column is shuffled by a fresh
permutation and the increase in squared prediction error is accumulated,
normalized by (number of trees) * (OOB size). The default mode draws the
permutations uniformly from the fixed-point-free class; ``unrestricted`` mode
draws from the full symmetric group and exists only for comparison.

Only forests trained by subsampling without replacement are supported: under
bootstrapping the OOB size is random and the permutation law would depend on
the tree's resampling draw, which breaks the unbiasedness guarantee.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .datagen import LinkModel, RegressionDataset
from .errors import (
    InvalidParameterError,
    MissingProvenanceError,
    NoDerangementError,
    UnsupportedSchemeError,
)
from .forest import ForestModel
from .oracle import DEFAULT_MC_DRAWS, oracle_vector
from .randomness import WITHOUT_REPLACEMENT, SeedSpec, _derangement

MODE_DERANGEMENT = "derangement"
MODE_UNRESTRICTED = "unrestricted"
MODES = (MODE_DERANGEMENT, MODE_UNRESTRICTED)


@dataclass(frozen=True, eq=False)
class ImportanceReport:
    """Per-feature empirical importance plus optional oracle annotation."""

    per_feature: np.ndarray
    mode: str
    gamma_n: int
    skipped_trees: int
    seed: SeedSpec
    oracle: Optional[np.ndarray] = None
    gap: Optional[np.ndarray] = None
    informative: Optional[tuple[int, ...]] = None

    @property
    def p(self) -> int:
        return int(self.per_feature.size)


def _draw_perms(master_seed: int, base_key: tuple, t: int, p: int, gamma: int,
                mode: str) -> np.ndarray:
    """One fresh permutation per feature for tree t, from (seed, tree, feature) streams."""
    perms = np.empty((p, gamma), dtype=np.int64)
    for j in range(p):
        ss = np.random.SeedSequence(master_seed, spawn_key=base_key + (t, j))
        rng = np.random.Generator(np.random.PCG64(ss))
        if mode == MODE_DERANGEMENT:
            perms[j] = _derangement(rng, gamma)
        else:
            perms[j] = rng.permutation(gamma)
    return perms


def permutation_importance(model: ForestModel, data: RegressionDataset | None = None,
                           mode: str = MODE_DERANGEMENT,
                           seed: SeedSpec | None = None) -> ImportanceReport:
    """Empirical OOB permutation importance of every feature.

    Requires the training dataset (fingerprint-checked) and a forest trained
    without replacement. ``seed`` drives the permutation draws; evaluation
    order never affects the result because each (tree, feature) pair consumes
    its own substream. Negative values are reported as-is.
    """
    if mode not in MODES:
        raise InvalidParameterError(f"unknown importance mode: {mode!r}")
    if seed is None:
        raise InvalidParameterError("permutation importance requires an explicit seed")
    if data is None:
        data = model.data
        if data is None:
            raise InvalidParameterError("model carries no training data; pass the dataset")
    else:
        model.check_data(data)
    if model.params.scheme != WITHOUT_REPLACEMENT:
        raise UnsupportedSchemeError(
            "importance is only defined for forests subsampled without replacement; "
            "with-replacement OOB sizes are random and void the unbiasedness guarantee"
        )
    gamma = model.gamma_n
    if mode == MODE_DERANGEMENT and gamma < 2:
        raise NoDerangementError(
            f"derangement mode needs an OOB size of at least 2 per tree, have gamma_n={gamma}"
        )

    p = model.p
    base_key = seed.child("perm")._spawn_key()
    totals = np.zeros(p)
    for t, (ft, rec) in enumerate(zip(model.flat_trees, model.records)):
        X_oob = np.ascontiguousarray(data.features[rec.oob])
        y_oob = np.ascontiguousarray(data.response[rec.oob])
        perms = _draw_perms(seed.master_seed, base_key, t, p, gamma, mode)
        totals += _kernels.importance_deltas(
            ft.feature, ft.threshold, ft.left, ft.right, ft.value,
            X_oob, y_oob, perms,
        )
    totals /= model.m_trees * gamma
    return ImportanceReport(per_feature=totals, mode=mode, gamma_n=gamma,
                            skipped_trees=0, seed=seed)


def importance_with_oracle(report: ImportanceReport, model_spec: LinkModel | None,
                           draws: int = DEFAULT_MC_DRAWS) -> ImportanceReport:
    """Attach theoretical importance values, per-feature gaps, and the informative set."""
    if model_spec is None:
        raise MissingProvenanceError(
            "no generating model available; oracle annotation needs synthetic provenance"
        )
    if model_spec.p != report.p:
        raise InvalidParameterError(
            f"model has p={model_spec.p} features but the report covers {report.p}"
        )
    oracle = oracle_vector(model_spec, draws=draws)
    return replace(report, oracle=oracle, gap=report.per_feature - oracle,
                   informative=model_spec.informative_set())


def report_to_csv(report: ImportanceReport, path: str | Path | None = None) -> str:
    """Serialize a report as `feature,importance,oracle,gap,mode,gamma_n,seed` CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["feature", "importance", "oracle", "gap", "mode", "gamma_n", "seed"])
    seed_repr = str(report.seed.master_seed)
    if report.seed.stream_id:
        seed_repr += ":" + "/".join(map(str, report.seed.stream_id))
    for j in range(report.p):
        oracle = "" if report.oracle is None else repr(float(report.oracle[j]))
        gap = "" if report.gap is None else repr(float(report.gap[j]))
        writer.writerow([
            j + 1,
            repr(float(report.per_feature[j])),
            oracle,
            gap,
            report.mode,
            report.gamma_n,
            seed_repr,
        ])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
