"""Synthetic regression data: link models, calibrated noise, CSV round-trip.

Four link families over uniform features on the unit cube are supported:
linear, polynomial (coefficient j multiplies x_j^j, positions counted from 1),
trigonometric (2*sin(x'beta + 2)), and a non-continuous switch model that
changes branch at x_3 = 0.5. Noise variance is calibrated from a target
signal-to-noise ratio: sigma^2 = Var(m(X)) / sn.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from hashlib import sha256
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .randomness import SeedSpec

LINK_KINDS = ("linear", "polynomial", "trigonometric", "non_continuous")

# Baseline coefficient vector of the simulation study, p = 10.
BETA_0 = (2.0, 4.0, 2.0, -3.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)

# Fixed calibration stream for Monte-Carlo variance estimates of the
# non-additive links (no closed form is used for those).
_CALIBRATION_SEED = SeedSpec(0x5EEDCA11, ("link-variance",))
_CALIBRATION_DRAWS = 10**6
_MC_CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class LinkModel:
    """A link function family together with its coefficient vector."""

    kind: str
    beta: np.ndarray

    def __post_init__(self):
        if self.kind not in LINK_KINDS:
            raise InvalidParameterError(f"unknown link kind: {self.kind!r}")
        beta = np.asarray(self.beta, dtype=float)
        if beta.ndim != 1 or beta.size < 1:
            raise InvalidParameterError("beta must be a non-empty 1-d coefficient vector")
        object.__setattr__(self, "beta", beta)
        if self.kind == "non_continuous" and beta.size < 5:
            raise InvalidParameterError("non_continuous model needs at least 5 coefficients")

    @property
    def p(self) -> int:
        return int(self.beta.size)

    def informative_set(self) -> tuple[int, ...]:
        """1-based labels of the informative features.

        For the non-continuous model this is {1,..,5} by definition of the
        branches; otherwise it is the set of non-zero coefficient positions.
        """
        if self.kind == "non_continuous":
            return tuple(range(1, 6))
        return tuple(int(j) + 1 for j in np.flatnonzero(self.beta != 0.0))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "beta": self.beta.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LinkModel":
        return cls(kind=d["kind"], beta=np.asarray(d["beta"], dtype=float))


def beta_default(p: int = 10) -> np.ndarray:
    """[2, 4, 2, -3, 1] padded with zeros to length p (p >= 5)."""
    if p < 5:
        raise InvalidParameterError(f"default beta needs p >= 5, got {p}")
    beta = np.zeros(p)
    beta[:5] = BETA_0[:5]
    return beta


def high_dim_model(n: int) -> LinkModel:
    """Linear model with p = n + 5 features, only the first five informative."""
    if n < 1:
        raise InvalidParameterError(f"need n >= 1, got {n}")
    return LinkModel("linear", beta_default(n + 5))


def link_eval(model: LinkModel, x: np.ndarray) -> float | np.ndarray:
    """Evaluate the link at a point (p,) or row-wise on a matrix (n, p)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != model.p:
        raise InvalidInputError(
            f"point dimension {x.shape} does not match model p={model.p}"
        )
    beta = model.beta
    if model.kind == "linear":
        out = X @ beta
    elif model.kind == "polynomial":
        exponents = np.arange(1, model.p + 1, dtype=float)
        out = np.power(X, exponents) @ beta
    elif model.kind == "trigonometric":
        out = 2.0 * np.sin(X @ beta + 2.0)
    else:  # non_continuous
        upper = X[:, :3] @ beta[:3]
        lower = X[:, 3:5] @ beta[3:5] + 3.0
        out = np.where(X[:, 2] > 0.5, upper, lower)
    return float(out[0]) if single else out


@dataclass(frozen=True)
class LinkVariance:
    value: float
    method: str  # "closed_form" | "monte_carlo"
    draws: int | None = None
    std_error: float | None = None


def link_variance_detail(model: LinkModel) -> LinkVariance:
    """Var(m(X)) under X ~ Unif[0,1]^p.

    Closed form for the additive kinds; for the trigonometric and
    non-continuous links a fixed-seed Monte-Carlo estimate with 10^6 draws is
    used so that the calibration is reproducible.
    """
    beta = model.beta
    if model.kind == "linear":
        return LinkVariance(float(np.sum(beta**2) / 12.0), "closed_form")
    if model.kind == "polynomial":
        j = np.arange(1, model.p + 1, dtype=float)
        var_terms = 1.0 / (2.0 * j + 1.0) - 1.0 / (j + 1.0) ** 2
        return LinkVariance(float(np.sum(beta**2 * var_terms)), "closed_form")
    rng = _CALIBRATION_SEED.child(model.kind, model.p).rng()
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < _CALIBRATION_DRAWS:
        m = min(_MC_CHUNK, _CALIBRATION_DRAWS - done)
        vals = link_eval(model, rng.random((m, model.p)))
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals**2))
        done += m
    mean = total / done
    var = total_sq / done - mean**2
    # std error of a variance estimate ~ var * sqrt(2/(n-1)) under near-normal m(X)
    se = var * np.sqrt(2.0 / (done - 1))
    return LinkVariance(float(var), "monte_carlo", draws=done, std_error=float(se))


def link_variance(model: LinkModel) -> float:
    return link_variance_detail(model).value


@dataclass(frozen=True)
class Provenance:
    """Generation record attached to synthetic datasets."""

    model: LinkModel
    sn: float
    sigma2: float
    seed: SeedSpec
    noiseless: bool = False

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "sn": self.sn,
            "sigma2": self.sigma2,
            "seed": self.seed.to_dict(),
            "noiseless": self.noiseless,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Provenance":
        return cls(
            model=LinkModel.from_dict(d["model"]),
            sn=float(d["sn"]),
            sigma2=float(d["sigma2"]),
            seed=SeedSpec.from_dict(d["seed"]),
            noiseless=bool(d.get("noiseless", False)),
        )


@dataclass(eq=False)
class RegressionDataset:
    """Feature matrix on the unit cube plus response vector."""

    features: np.ndarray
    response: np.ndarray
    provenance: Provenance | None = None
    _fingerprint: str | None = field(default=None, repr=False)

    def __post_init__(self):
        X = np.ascontiguousarray(self.features, dtype=float)
        y = np.ascontiguousarray(self.response, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.size:
            raise InvalidInputError("features must be (n, p) with a matching response vector")
        n, p = X.shape
        if n < 2 or p < 1:
            raise InvalidInputError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise InvalidInputError("dataset contains non-finite values")
        if X.min() < 0.0 or X.max() > 1.0:
            raise InvalidInputError("feature entries must lie in [0, 1]")
        self.features = X
        self.response = y

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def fingerprint(self) -> str:
        """SHA-256 over shape and raw float64 bytes; stable across CSV round-trips."""
        if self._fingerprint is None:
            h = sha256()
            h.update(np.asarray(self.features.shape, dtype=np.int64).tobytes())
            h.update(self.features.tobytes())
            h.update(self.response.tobytes())
            self._fingerprint = h.hexdigest()
        return self._fingerprint


def generate_dataset(
    model: LinkModel,
    n: int,
    sn: float,
    seed: SeedSpec,
    noiseless: bool = False,
) -> RegressionDataset:
    """X iid uniform on [0,1]^p, Y = m(X) + eps with eps ~ N(0, Var(m(X))/sn).

    ``noiseless=True`` sets sigma^2 = 0 exactly (test scaffolding for oracle
    checks; the model framework itself assumes positive noise).
    """
    if n < 2:
        raise InvalidParameterError(f"need n >= 2, got n={n}")
    if not noiseless and not sn > 0:
        raise InvalidParameterError(f"signal-to-noise ratio must be positive, got {sn}")
    if noiseless:
        sigma2 = 0.0
    else:
        lv = link_variance(model)
        if lv <= 0.0:
            raise InvalidParameterError(
                "link variance is zero (no informative coefficient); cannot calibrate noise"
            )
        sigma2 = lv / sn
    rng = seed.rng()
    X = rng.random((n, model.p))
    y = link_eval(model, X)
    if sigma2 > 0.0:
        y = y + rng.normal(0.0, np.sqrt(sigma2), size=n)
    prov = Provenance(model=model, sn=float(sn), sigma2=float(sigma2), seed=seed,
                      noiseless=noiseless)
    return RegressionDataset(features=X, response=np.asarray(y, dtype=float),
                             provenance=prov)


# ---------------------------------------------------------------------------
# CSV / sidecar serialization


def save_dataset_csv(dataset: RegressionDataset, path: str | Path,
                     provenance_path: str | Path | None = None) -> None:
    """Write `x1,..,xp,y` CSV (%.17g keeps float64 exact); optional sidecar JSON."""
    path = Path(path)
    header = [f"x{j}" for j in range(1, dataset.p + 1)] + ["y"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(dataset.n):
            row = ["%.17g" % v for v in dataset.features[i]]
            row.append("%.17g" % dataset.response[i])
            writer.writerow(row)
    if provenance_path is not None:
        if dataset.provenance is None:
            raise InvalidInputError("dataset has no provenance to save")
        with open(provenance_path, "w") as fh:
            json.dump(dataset.provenance.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def load_dataset_csv(path: str | Path,
                     provenance_path: str | Path | None = None) -> RegressionDataset:
    """Read a `x1,..,xp,y` CSV, citing the offending row on schema violations."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInputError(f"{path}: empty file") from None
        header = [c.strip() for c in header]
        p = len(header) - 1
        expected = [f"x{j}" for j in range(1, p + 1)] + ["y"]
        if p < 1 or header != expected:
            raise InvalidInputError(
                f"{path}: header must be x1,..,xp,y (got {','.join(header)})"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != p + 1:
                raise InvalidInputError(f"{path}: row {lineno}: expected {p + 1} fields")
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise InvalidInputError(f"{path}: row {lineno}: non-numeric value") from None
            for j, v in enumerate(vals[:p]):
                if not (0.0 <= v <= 1.0):
                    raise InvalidInputError(
                        f"{path}: row {lineno}: feature x{j + 1}={v!r} outside [0, 1]"
                    )
            rows.append(vals)
    if len(rows) < 2:
        raise InvalidInputError(f"{path}: need at least 2 data rows")
    data = np.asarray(rows, dtype=float)
    provenance = None
    if provenance_path is not None and Path(provenance_path).exists():
        with open(provenance_path) as fh:
            provenance = Provenance.from_dict(json.load(fh))
    return RegressionDataset(features=data[:, :p], response=data[:, p],
                             provenance=provenance)
