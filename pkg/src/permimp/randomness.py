"""Seedable stochastic primitives: substreams, resampling, subspacing, derangements.

All randomness in the package flows through :class:`SeedSpec`. A spec is a
master seed plus a structured stream label; equal (seed, label) pairs replay
bit-identical sequences and distinct labels give statistically independent
streams, so results never depend on evaluation order or worker scheduling.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import InvalidParameterError, NoDerangementError

Label = Union[int, str, float]

WITHOUT_REPLACEMENT = "without_replacement"
WITH_REPLACEMENT = "with_replacement"
SCHEMES = (WITHOUT_REPLACEMENT, WITH_REPLACEMENT)

_HASH_BIT = 1 << 63


def _encode_label(label: Label) -> int:
    """Map one stream-label component to a 64-bit word.

    Small non-negative ints map to themselves; everything else goes through
    SHA-256 with the top bit set so hashed words never collide with plain ints.
    """
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
        v = int(label)
        if 0 <= v < _HASH_BIT:
            return v
        data = b"i:" + str(v).encode()
    elif isinstance(label, str):
        data = b"s:" + label.encode()
    elif isinstance(label, float):
        data = b"f:" + repr(label).encode()
    else:
        raise TypeError(f"unsupported stream label type: {type(label)!r}")
    digest = hashlib.sha256(data).digest()
    return int.from_bytes(digest[:8], "little") | _HASH_BIT


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a structured substream label.

    ``stream_id`` components may be ints, strings, or floats; they are folded
    into the spawn key of a ``numpy.random.SeedSequence``, so ``child``
    derivation is cheap, collision-resistant, and order-stable.
    """

    master_seed: int
    stream_id: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not (0 <= int(self.master_seed) < 2**64):
            raise InvalidParameterError("master_seed must be a 64-bit unsigned integer")

    def child(self, *labels: Label) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_id + tuple(labels))

    def _spawn_key(self) -> tuple:
        return tuple(_encode_label(lbl) for lbl in self.stream_id)

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self._spawn_key())
        return np.random.Generator(np.random.PCG64(ss))

    def to_dict(self) -> dict:
        return {"master_seed": int(self.master_seed), "stream_id": list(self.stream_id)}

    @classmethod
    def from_dict(cls, d: dict) -> "SeedSpec":
        return cls(int(d["master_seed"]), tuple(d.get("stream_id", ())))


@dataclass(frozen=True, eq=False)
class ResampleRecord:
    """One tree's resampling draw: in-bag indices and their OOB complement.

    ``in_bag`` is a sorted index array; under with-replacement sampling it is a
    multiset (repeats carry multiplicity). ``oob`` is the sorted set of indices
    that were never selected.
    """

    scheme: str
    in_bag: np.ndarray
    oob: np.ndarray

    @property
    def gamma(self) -> int:
        return int(self.oob.size)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "in_bag": self.in_bag.tolist(),
            "oob": self.oob.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResampleRecord":
        return cls(
            scheme=d["scheme"],
            in_bag=np.asarray(d["in_bag"], dtype=np.int64),
            oob=np.asarray(d["oob"], dtype=np.int64),
        )


def subsample_without_replacement(n: int, a_n: int, seed: SeedSpec) -> ResampleRecord:
    """Draw a uniform a_n-subset of {0,..,n-1} as in-bag; the rest is OOB.

    a_n must satisfy 1 <= a_n < n so the OOB set is non-empty.
    """
    if n < 2:
        raise InvalidParameterError(f"need n >= 2 for subsampling, got n={n}")
    if not (1 <= a_n < n):
        raise InvalidParameterError(
            f"a_n must satisfy 1 <= a_n < n (got a_n={a_n}, n={n}); "
            "a_n >= n would leave no out-of-bag observations"
        )
    rng = seed.rng()
    in_bag = np.sort(rng.choice(n, size=a_n, replace=False))
    mask = np.ones(n, dtype=bool)
    mask[in_bag] = False
    return ResampleRecord(WITHOUT_REPLACEMENT, in_bag.astype(np.int64), np.flatnonzero(mask))


def bootstrap_with_replacement(n: int, seed: SeedSpec) -> ResampleRecord:
    """Draw n iid uniform indices with replacement; OOB = zero-multiplicity indices."""
    if n < 1:
        raise InvalidParameterError(f"need n >= 1 for bootstrap, got n={n}")
    rng = seed.rng()
    in_bag = np.sort(rng.integers(0, n, size=n))
    mask = np.ones(n, dtype=bool)
    mask[in_bag] = False
    return ResampleRecord(WITH_REPLACEMENT, in_bag.astype(np.int64), np.flatnonzero(mask))


def feature_subspace(p: int, v_try: int, seed: SeedSpec) -> np.ndarray:
    """Uniform v_try-subset of the feature indices {0,..,p-1}, sorted."""
    if not (1 <= v_try <= p):
        raise InvalidParameterError(f"v_try must lie in [1, p] (got v_try={v_try}, p={p})")
    if v_try == p:
        return np.arange(p, dtype=np.int64)
    rng = seed.rng()
    return np.sort(rng.choice(p, size=v_try, replace=False)).astype(np.int64)


def random_derangement(k: int, seed: SeedSpec) -> np.ndarray:
    """Uniform draw from the fixed-point-free permutations of {0,..,k-1}.

    Rejection sampling from uniform permutations: the conditional law given
    acceptance is exactly uniform on the derangements, and the acceptance
    probability tends to 1/e, so fewer than three attempts are needed on
    average.
    """
    if k <= 1:
        raise NoDerangementError(
            f"no fixed-point-free permutation of {k} element(s) exists"
        )
    rng = seed.rng()
    return _derangement(rng, k)


def _derangement(rng: np.random.Generator, k: int) -> np.ndarray:
    idx = np.arange(k)
    if k > 64:  # call overhead is negligible next to the permutation itself
        while True:
            perm = rng.permutation(k)
            if not np.any(perm == idx):
                return perm
    # small k: test a few iid attempts per call; the first accepted one is
    # still an exactly uniform draw from the fixed-point-free class
    while True:
        perms = np.argsort(rng.random((4, k)), axis=1)
        hits = np.flatnonzero(~(perms == idx).any(axis=1))
        if hits.size:
            return perms[hits[0]]


def oob_probability(n: int, a_n: int | None = None, scheme: str = WITHOUT_REPLACEMENT) -> float:
    """Limiting fraction of trees that omit a fixed observation.

    1 - a_n/n under subsampling without replacement, (1 - 1/n)^n under
    bootstrapping with replacement.
    """
    if scheme == WITHOUT_REPLACEMENT:
        if a_n is None or n < 2 or not (1 <= a_n < n):
            raise InvalidParameterError(
                f"without-replacement requires 1 <= a_n < n (got a_n={a_n}, n={n})"
            )
        return 1.0 - a_n / n
    if scheme == WITH_REPLACEMENT:
        if n < 1:
            raise InvalidParameterError(f"need n >= 1, got n={n}")
        return math.pow(1.0 - 1.0 / n, n)
    raise InvalidParameterError(f"unknown sampling scheme: {scheme!r}")


def default_subsample_size(n: int) -> int:
    """ceil(2n/3), the subsampling size of the simulation study.

    Clamped to n - 1 so at least one observation stays out of bag (only binds
    at n = 2, where ceil(2n/3) = n).
    """
    return min(-((-2 * n) // 3), n - 1)
