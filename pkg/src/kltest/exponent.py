"""Optimal type II error exponents and the least-favorable law F*."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .divergence import kl, renyi
from .errors import EnumerationLimitError, InfiniteExponentError, ValidationError
from .oracle import enumerate_types, num_types
from .simplex import ZERO_TOL, Distribution, as_probs, check_same_dim

#: Largest grid the numeric minimizer will materialize.
GRID_LIMIT = 20_000_000
REFINE_FACTOR = 10


@dataclass(frozen=True)
class ExponentReport:
    f_star: Distribution | None
    value_closed_form: float
    value_renyi_half: float
    value_numeric: float
    numeric_argmin: Distribution | None = None
    resolution: float | None = None


def stein_exponent(P, Q) -> float:
    """Optimal one-sample type II exponent D(P||Q), in bits."""
    return kl(P, Q)


def f_star(P, Q) -> Distribution:
    """Normalized geometric mean sqrt(p_k q_k) / sum_i sqrt(p_i q_i).

    This is the minimizer of D(F||P) + D(F||Q) over the simplex.
    """
    p, q = as_probs(P), as_probs(Q)
    check_same_dim(p, q)
    w = np.sqrt(p * q)
    w[(p <= ZERO_TOL) | (q <= ZERO_TOL)] = 0.0
    z = w.sum()
    if z <= 0.0:
        raise InfiniteExponentError("supports of P and Q are disjoint; the two-sample exponent is infinite")
    f = w / z
    return Distribution(f / f.sum())


def two_sample_exponent(P, Q, resolution: float | None = 1e-3) -> ExponentReport:
    """Optimal two-sample exponent evaluated three ways.

    ``value_closed_form`` is D(F*||P) + D(F*||Q), ``value_renyi_half`` is
    D_{1/2}(P||Q) and ``value_numeric`` comes from the grid search (skipped
    when ``resolution`` is None or the alphabet is too large for the grid).
    """
    p, q = as_probs(P), as_probs(Q)
    check_same_dim(p, q)
    try:
        fs = f_star(p, q)
    except InfiniteExponentError:
        return ExponentReport(None, math.inf, math.inf, math.inf, None, resolution)
    closed = kl(fs, p) + kl(fs, q)
    half = renyi(0.5, p, q)
    numeric, argmin = math.nan, None
    if resolution is not None and int(np.count_nonzero((p > ZERO_TOL) & (q > ZERO_TOL))) <= 4:
        argmin, numeric = minimize_sum_kl_numeric(p, q, resolution)
    return ExponentReport(fs, closed, half, numeric, argmin, resolution)


def sanov_upper_bound(n: int, d: int, exponent: float) -> float:
    """Raw Sanov bound (n+1)^d 2^(-n exponent); may exceed 1."""
    if int(n) != n or n < 1 or int(d) != d or d < 1:
        raise ValidationError(f"need positive integers n, d; got n={n!r}, d={d!r}")
    if not exponent >= 0:
        raise ValidationError(f"exponent must be nonnegative, got {exponent!r}")
    if math.isinf(exponent):
        return 0.0
    return float(n + 1) ** d * 2.0 ** (-n * exponent)


def _simplex_grid(m: int, k: int) -> np.ndarray:
    count = num_types(m, k)
    if count > GRID_LIMIT:
        raise EnumerationLimitError(
            f"grid with step 1/{m} on a {k}-point support has {count} points (limit {GRID_LIMIT}); "
            "use a coarser resolution or the closed form f_star")
    return enumerate_types(m, k, limit=GRID_LIMIT) / m


def _refine_grid(center: np.ndarray, step: float) -> np.ndarray:
    k = center.size
    h = step / REFINE_FACTOR
    offs = np.arange(-REFINE_FACTOR, REFINE_FACTOR + 1) * h
    if k == 1:
        return center[None, :]
    heads = np.array(list(itertools.product(offs, repeat=k - 1)))
    pts = np.empty((heads.shape[0], k))
    pts[:, :-1] = center[:-1] + heads
    pts[:, -1] = 1.0 - pts[:, :-1].sum(axis=1)
    keep = np.all(pts >= -1e-15, axis=1)
    return np.clip(pts[keep], 0.0, 1.0)


def minimize_sum_kl_numeric(P, Q, resolution: float = 1e-3) -> tuple[Distribution, float]:
    """Brute-force minimum of D(F||P) + D(F||Q) over a simplex grid.

    The grid has step ``resolution`` on supp(P) & supp(Q); one finer pass with
    step ``resolution / 10`` is then run around the best coarse point. Ties
    resolve to the lexicographically smallest grid point.
    """
    p, q = as_probs(P), as_probs(Q)
    check_same_dim(p, q)
    if p.size > 4:
        raise ValidationError(f"grid minimizer supports d <= 4 (got d={p.size}); use f_star instead")
    if not 0.0 < resolution <= 0.5:
        raise ValidationError(f"resolution must lie in (0, 0.5], got {resolution!r}")
    sup = (p > ZERO_TOL) & (q > ZERO_TOL)
    if not sup.any():
        raise InfiniteExponentError("supports of P and Q are disjoint; the two-sample exponent is infinite")
    lp, lq = np.log2(p[sup]), np.log2(q[sup])
    m = max(int(round(1.0 / resolution)), 1)
    grid = _simplex_grid(m, int(sup.sum()))
    i, _ = _kernels.grid_sum_kl(grid, lp, lq)
    fine = _refine_grid(grid[i], 1.0 / m)
    j, value = _kernels.grid_sum_kl(fine, lp, lq)
    f = np.zeros(p.size)
    f[sup] = fine[j]
    return Distribution(f / f.sum()), max(float(value), 0.0)
