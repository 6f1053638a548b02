"""Exact finite-n error probabilities by enumerating types.

Every quantity here is a finite sum over count vectors, computed in log
space. Pair sums for the two-sample test run over fixed row chunks whose
partial sums are merged in chunk order, so results do not depend on the
number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln, logsumexp

from . import _kernels
from .errors import EnumerationLimitError, ValidationError
from .simplex import ZERO_TOL, as_probs, check_same_dim
from .testing import ONE_SAMPLE, TestVariant, hoeffding_threshold, two_sample_threshold

TYPE_LIMIT = 10**7
PAIR_LIMIT = 10**8
CHUNK_ROWS = 64
LN2 = math.log(2.0)


@dataclass(frozen=True)
class ExactErrorReport:
    n: int
    type_1: float
    type_2: float
    log2_type_1: float
    log2_type_2: float
    c_n: float
    delta_n: float | None
    variant: str

    @property
    def exponent(self) -> float:
        """-log2(type_2)/n; ``inf`` when the type II error is exactly zero."""
        if self.log2_type_2 == -math.inf:
            return math.inf
        return -self.log2_type_2 / self.n


def num_types(n: int, d: int) -> int:
    """Number of count vectors of length d summing to n."""
    return math.comb(n + d - 1, d - 1)


def _compositions(n: int, d: int) -> np.ndarray:
    if d == 1:
        return np.array([[n]], dtype=np.int64)
    if d == 2:
        a = np.arange(n + 1, dtype=np.int64)
        return np.stack([a, n - a], axis=1)
    blocks = []
    for first in range(n + 1):
        sub = _compositions(n - first, d - 1)
        blocks.append(np.column_stack([np.full(sub.shape[0], first, dtype=np.int64), sub]))
    return np.concatenate(blocks)


def enumerate_types(n: int, d: int, limit: int = TYPE_LIMIT) -> np.ndarray:
    """All count vectors of length ``d`` summing to ``n``, in lexicographic order.

    Returns an ``(num_types(n, d), d)`` int64 array.
    """
    if int(n) != n or n < 0 or int(d) != d or d < 1:
        raise ValidationError(f"need n >= 0 and d >= 1, got n={n!r}, d={d!r}")
    count = num_types(n, d)
    if count > limit:
        raise EnumerationLimitError(f"{count} types for n={n}, d={d} exceeds the limit of {limit}")
    return _compositions(int(n), int(d))


def log_factorials(n: int) -> np.ndarray:
    return gammaln(np.arange(n + 1, dtype=np.float64) + 1.0)


def log_type_probabilities(types: np.ndarray, P, lfact: np.ndarray | None = None) -> np.ndarray:
    """Natural-log multinomial mass of each type class under ``P`` (``-inf`` when impossible)."""
    p = as_probs(P)
    types = np.asarray(types, dtype=np.int64)
    if types.shape[1] != p.size:
        raise ValidationError(f"alphabet sizes differ: {types.shape[1]} vs {p.size}")
    n = int(types[0].sum())
    if lfact is None:
        lfact = log_factorials(n)
    pos = p > ZERO_TOL
    logp = np.where(pos, np.log(np.where(pos, p, 1.0)), -np.inf)
    with np.errstate(invalid="ignore"):
        terms = np.where(types > 0, types * logp, 0.0)
    return lfact[n] - lfact[types].sum(axis=1) + terms.sum(axis=1)


def type_probability(counts, P) -> float:
    """Probability that an i.i.d. sample from ``P`` has exactly these counts."""
    counts = np.asarray(counts, dtype=np.int64)
    p = as_probs(P)
    if counts.ndim != 1 or counts.size != p.size:
        raise ValidationError(f"alphabet sizes differ: {counts.size} vs {p.size}")
    if np.any(counts < 0) or counts.sum() < 1:
        raise ValidationError("counts must be nonnegative with a positive total")
    return float(np.exp(log_type_probabilities(counts[None, :], p)[0]))


def _log2_probs(P) -> np.ndarray:
    p = as_probs(P)
    pos = p > ZERO_TOL
    return np.where(pos, np.log2(np.where(pos, p, 1.0)), -np.inf)


def _lse2(x: np.ndarray) -> float:
    """log2 of sum(exp(x)) for natural-log terms ``x``."""
    if x.size == 0 or np.all(x == -np.inf):
        return -math.inf
    return float(logsumexp(x)) / LN2


def _prob(log2_value: float) -> float:
    return 0.0 if log2_value == -math.inf else min(2.0 ** log2_value, 1.0)


def law_statistics(types: np.ndarray, n: int, P) -> np.ndarray:
    """D(t/n || P) in bits for every row ``t`` of ``types``."""
    return _kernels.law_stats(types, _kernels.log2_table(n), n, _log2_probs(P))


def exact_region_probability(P, n: int, predicate: Callable, vectorized: bool = False,
                             limit: int = TYPE_LIMIT) -> float:
    """Probability that the type of an n-sample from ``P`` satisfies ``predicate``.

    ``predicate`` receives one count vector at a time, or the full
    ``(T, d)`` type matrix when ``vectorized`` is true (returning a mask).
    """
    p = as_probs(P)
    types = enumerate_types(n, p.size, limit=limit)
    if vectorized:
        mask = np.asarray(predicate(types), dtype=bool)
    else:
        mask = np.fromiter((bool(predicate(t)) for t in types), dtype=bool, count=types.shape[0])
    lp = log_type_probabilities(types, p)
    return _prob(_lse2(lp[mask]))


def kl_ball_predicate(P, c: float, complement: bool = False) -> Callable:
    """Vectorized predicate for membership of the type in B(P, c) (or its complement)."""
    def pred(types):
        n = int(types[0].sum())
        inside = law_statistics(types, n, P) <= c
        return ~inside if complement else inside
    return pred


def exact_one_sample_errors(P, Q, n: int, eps: float, c: float | None = None,
                            limit: int = TYPE_LIMIT) -> ExactErrorReport:
    """Exact type I / type II errors of the one-sample KL-ball test.

    ``Q`` may be None, in which case the type II fields are NaN. ``c``
    overrides the default radius from :func:`hoeffding_threshold`.
    """
    p = as_probs(P)
    if Q is not None:
        check_same_dim(p, as_probs(Q))
    if c is None:
        c = hoeffding_threshold(n, p.size, eps)
    types = enumerate_types(n, p.size, limit=limit)
    lfact = log_factorials(n)
    accept = law_statistics(types, n, p) <= c
    l1 = _lse2(log_type_probabilities(types, p, lfact)[~accept])
    if Q is None:
        l2 = math.nan
    else:
        l2 = _lse2(log_type_probabilities(types, Q, lfact)[accept])
    return ExactErrorReport(int(n), _prob(l1), math.nan if Q is None else _prob(l2), l1, l2,
                            float(c), None, ONE_SAMPLE)


def pair_region_scan(types: np.ndarray, n: int, lp_x0, lp_y0, lp_x1, lp_y1, c: float,
                     variant: TestVariant, excl_x=None, excl_y=None, workers: int = 1):
    """Log2 masses of the rejected pairs under law 0 and the accepted pairs under law 1.

    A pair of types (s, t) is accepted iff the two-sample statistic is at most
    ``c`` and not both ``excl_x[s]`` and ``excl_y[t]`` hold.
    """
    T = types.shape[0]
    if excl_x is None:
        excl_x = np.zeros(T, dtype=np.bool_)
    if excl_y is None:
        excl_y = np.zeros(T, dtype=np.bool_)
    tab = _kernels.log2_table(n)
    args = (np.ascontiguousarray(types), tab, float(n),
            *(np.ascontiguousarray(a, dtype=np.float64) for a in (lp_x0, lp_y0, lp_x1, lp_y1)),
            float(c), variant.code, np.ascontiguousarray(excl_x, dtype=np.bool_),
            np.ascontiguousarray(excl_y, dtype=np.bool_))
    bounds = [(r, min(r + CHUNK_ROWS, T)) for r in range(0, T, CHUNK_ROWS)]

    def run(b):
        return _kernels.pair_scan(*args, b[0], b[1])

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    acc0 = (-math.inf, 0.0)
    acc1 = (-math.inf, 0.0)
    for m0, s0, m1, s1 in parts:  # fixed chunk order
        acc0 = _kernels.lse_merge(acc0, (m0, s0))
        acc1 = _kernels.lse_merge(acc1, (m1, s1))
    return _kernels.lse_value(acc0) / LN2, _kernels.lse_value(acc1) / LN2


def _pair_types(n: int, d: int) -> np.ndarray:
    T = num_types(n, d)
    if T * T > PAIR_LIMIT:
        raise EnumerationLimitError(f"{T}^2 type pairs for n={n}, d={d} exceeds the limit of {PAIR_LIMIT}")
    return enumerate_types(n, d)


def exact_two_sample_errors(P, Q, n: int, eps: float, variant: TestVariant | str = TestVariant.FORWARD,
                            c: float | None = None, gamma: float | None = None,
                            workers: int = 1) -> ExactErrorReport:
    """Exact errors of the two-sample test with both samples of length ``n``.

    Type I is computed with both samples drawn from ``P``; type II with the
    first from ``P`` and the second from ``Q``.
    """
    variant = TestVariant.parse(variant)
    p = as_probs(P)
    q = None if Q is None else as_probs(Q)
    if q is not None:
        check_same_dim(p, q)
    delta, c_default = two_sample_threshold(n, p.size, eps, gamma=gamma)
    if c is None:
        c = c_default
    types = _pair_types(n, p.size)
    lfact = log_factorials(n)
    lp = log_type_probabilities(types, p, lfact)
    lq = lp if q is None else log_type_probabilities(types, q, lfact)
    l1, l2 = pair_region_scan(types, n, lp, lp, lp, lq, c, variant, workers=workers)
    if q is None:
        t2, l2 = math.nan, math.nan
    else:
        t2 = _prob(l2)
    return ExactErrorReport(int(n), _prob(l1), t2, l1, l2, float(c), delta, variant.value)


def level_onset(ns, type_1s, eps: float) -> int | None:
    """Smallest n in ``ns`` from which every later type I error is at most ``eps``.

    None when the last value already exceeds ``eps``.
    """
    onset = None
    for n, a in zip(ns, type_1s):
        if a <= eps:
            if onset is None:
                onset = n
        else:
            onset = None
    return onset


def one_sample_exponent_bounds(P, Q, n: int, eps: float) -> tuple[float, float]:
    """Sandwich for -log2(type II)/n of the one-sample test.

    With m the smallest D(t/n || Q) over accepted types, the lower value is
    m - d log2(n+1)/n (Sanov) and the upper value is -log2 of the largest
    accepted type-class mass under Q, divided by n.
    """
    p, q = as_probs(P), as_probs(Q)
    check_same_dim(p, q)
    c = hoeffding_threshold(n, p.size, eps)
    types = enumerate_types(n, p.size)
    accept = law_statistics(types, n, p) <= c
    acc = types[accept]
    if acc.shape[0] == 0:
        return math.inf, math.inf
    dq = law_statistics(acc, n, q)
    m = float(dq.min())
    if math.isinf(m):
        return math.inf, math.inf
    best = float(log_type_probabilities(acc, q).max()) / LN2
    return m - p.size * math.log2(n + 1) / n, -best / n
