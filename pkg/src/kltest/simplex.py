"""Probability vectors and empirical types over a finite alphabet ``{0, ..., d-1}``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

#: Entries at or below this magnitude count as zero for support queries.
ZERO_TOL = 1e-12
SUM_TOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Distribution:
    """Immutable probability vector of length ``d``.

    Entries must lie in ``[0, 1]`` and sum to one within ``1e-9``. Use
    :func:`make_distribution` to normalize arbitrary nonnegative weights.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise ValidationError("distribution must be a nonempty 1-d vector")
        for i, p in enumerate(probs):
            if not np.isfinite(p) or p < 0.0 or p > 1.0:
                raise ValidationError(f"entry {i} = {p!r} is not a probability")
        total = float(probs.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"entries sum to {total!r}, not 1")
        object.__setattr__(self, "probs", _frozen(probs))

    @property
    def d(self) -> int:
        return int(self.probs.size)

    @property
    def support(self) -> np.ndarray:
        return self.probs > ZERO_TOL

    def __len__(self) -> int:
        return self.d

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __repr__(self):
        return f"Distribution({np.array2string(self.probs, separator=', ')})"


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Count vector of a sample (its *type*) together with the sample size."""

    counts: np.ndarray
    n: int

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size == 0:
            raise ValidationError("counts must be a nonempty 1-d vector")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(np.equal(np.mod(counts, 1), 0)):
                raise ValidationError("counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            i = int(np.argmax(counts < 0))
            raise ValidationError(f"count {i} is negative")
        n = int(self.n)
        if n < 1:
            raise ValidationError("sample size must be positive")
        if int(counts.sum()) != n:
            raise ValidationError(f"counts sum to {int(counts.sum())}, expected n={n}")
        object.__setattr__(self, "counts", _frozen(counts))
        object.__setattr__(self, "n", n)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "EmpiricalDistribution":
        counts = np.asarray(counts, dtype=np.int64)
        return cls(counts, int(counts.sum()))

    @property
    def d(self) -> int:
        return int(self.counts.size)

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.n

    def to_distribution(self) -> Distribution:
        return Distribution(self.probs)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, EmpiricalDistribution):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash((self.n, self.counts.tobytes()))

    def __repr__(self):
        return f"EmpiricalDistribution(counts={self.counts.tolist()}, n={self.n})"


def make_distribution(weights: Iterable[float]) -> Distribution:
    """Normalize nonnegative ``weights`` into a :class:`Distribution`.

    >>> make_distribution([2, 6]).probs.tolist()
    [0.25, 0.75]
    """
    w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights,
                   dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError("weights must be a nonempty 1-d vector")
    for i, x in enumerate(w):
        if not np.isfinite(x) or x < 0:
            raise ValidationError(f"weight {i} = {x!r} is negative or not finite")
    total = w.sum()
    if total <= 0:
        raise ValidationError("weights are all zero")
    probs = w / total
    # renormalizing can leave tiny float excess above 1 for a single-entry vector
    return Distribution(np.clip(probs, 0.0, 1.0))


def empirical_from_samples(samples: Sequence[int], d: int) -> EmpiricalDistribution:
    """Count the symbols of ``samples``; every symbol must lie in ``[0, d)``."""
    if d < 1:
        raise ValidationError("alphabet size must be positive")
    x = np.asarray(samples)
    if x.ndim != 1 or x.size == 0:
        raise ValidationError("sample sequence is empty")
    if not np.issubdtype(x.dtype, np.integer):
        raise ValidationError("samples must be integer symbols")
    bad = np.nonzero((x < 0) | (x >= d))[0]
    if bad.size:
        pos = int(bad[0])
        raise ValidationError(f"symbol {int(x[pos])} at position {pos} is outside [0, {d})")
    counts = np.bincount(x, minlength=d)
    return EmpiricalDistribution(counts, int(x.size))


def as_probs(x) -> np.ndarray:
    """Probability vector of a Distribution, EmpiricalDistribution or array-like."""
    if isinstance(x, (Distribution, EmpiricalDistribution)):
        return np.asarray(x.probs, dtype=np.float64)
    return np.asarray(x, dtype=np.float64)


def check_same_dim(p: np.ndarray, q: np.ndarray) -> None:
    if p.shape != q.shape:
        raise ValidationError(f"alphabet sizes differ: {p.size} vs {q.size}")


def min_positive_prob(P) -> float:
    """Smallest strictly positive entry, p_min."""
    p = as_probs(P)
    pos = p[p > ZERO_TOL]
    if pos.size == 0:
        raise ValidationError("distribution has no positive entry")
    return float(pos.min())


def support(P) -> np.ndarray:
    return as_probs(P) > ZERO_TOL


def is_absolutely_continuous(P, Q) -> bool:
    """True iff supp(P) is contained in supp(Q)."""
    p, q = as_probs(P), as_probs(Q)
    check_same_dim(p, q)
    return bool(np.all(~(p > ZERO_TOL) | (q > ZERO_TOL)))


def supports_overlap(P, Q) -> bool:
    p, q = as_probs(P), as_probs(Q)
    check_same_dim(p, q)
    return bool(np.any((p > ZERO_TOL) & (q > ZERO_TOL)))


def parse_distribution_text(text: str, source: str = "<string>") -> Distribution:
    """Parse one probability per line, or a comma-separated list on one line.

    Blank lines and ``#`` comments are ignored. Weights are normalized.
    """
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for tok in line.replace(",", " ").split():
            try:
                values.append(float(tok))
            except ValueError:
                raise ValidationError(f"{source}:{lineno}: cannot parse {tok!r} as a number") from None
    if not values:
        raise ValidationError(f"{source}: no probabilities found")
    try:
        return make_distribution(values)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


def parse_samples_text(text: str, source: str = "<string>") -> np.ndarray:
    """Parse whitespace-separated nonnegative integer symbols."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        for tok in line.split():
            try:
                v = int(tok)
            except ValueError:
                raise ValidationError(f"{source}:{lineno}: cannot parse {tok!r} as a symbol") from None
            if v < 0:
                raise ValidationError(f"{source}:{lineno}: negative symbol {v}")
            out.append(v)
    if not out:
        raise ValidationError(f"{source}: no samples found")
    return np.asarray(out, dtype=np.int64)
