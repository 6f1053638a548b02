"""Divergences between finite distributions, all in bits.

Divergence values are plain floats; ``math.inf`` stands for +infinity.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .simplex import ZERO_TOL, as_probs, check_same_dim, min_positive_prob

LN2 = math.log(2.0)
NEG_SLACK = 1e-12


def _clamp(value: float) -> float:
    if value < 0.0:
        if value < -NEG_SLACK:
            # genuine negative means a bug upstream, not rounding
            raise ArithmeticError(f"divergence evaluated to {value!r}")
        return 0.0
    return float(value)


def _pair(P, Q):
    p, q = as_probs(P), as_probs(Q)
    check_same_dim(p, q)
    return p, q


def kl(P, Q) -> float:
    """Relative entropy D(P||Q) in bits; ``inf`` unless supp(P) is inside supp(Q)."""
    p, q = _pair(P, Q)
    pos = p > ZERO_TOL
    if np.any(pos & ~(q > ZERO_TOL)):
        return math.inf
    pp, qq = p[pos], q[pos]
    return _clamp(float(np.sum(pp * np.log2(pp / qq))))


def total_variation(P, Q) -> float:
    p, q = _pair(P, Q)
    return float(0.5 * np.abs(p - q).sum())


def renyi(alpha: float, P, Q) -> float:
    """Renyi divergence of order ``alpha`` in (0, 1), in bits.

    Infinite exactly when the supports are disjoint.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie strictly inside (0, 1), got {alpha!r}")
    p, q = _pair(P, Q)
    both = (p > ZERO_TOL) & (q > ZERO_TOL)
    if not np.any(both):
        return math.inf
    s = float(np.sum(p[both] ** alpha * q[both] ** (1.0 - alpha)))
    return _clamp(math.log2(s) / (alpha - 1.0))


def bhattacharyya_coefficient(P, Q) -> float:
    p, q = _pair(P, Q)
    return float(np.sum(np.sqrt(p * q)))


def continuity_bound(C, eps: float) -> float:
    """KL continuity modulus g(C, eps) for an L1 perturbation of size ``eps``.

    For A, B absolutely continuous w.r.t. C with ||A - B||_1 <= eps,
    |D(A||C) - D(B||C)| <= 2 log2(1/c_min) eps + (2 sqrt 2 / ln 2) sqrt(eps).
    """
    if eps < 0:
        raise ValidationError(f"eps must be nonnegative, got {eps!r}")
    c_min = min_positive_prob(C)
    return 2.0 * math.log2(1.0 / c_min) * eps + (2.0 * math.sqrt(2.0) / LN2) * math.sqrt(eps)


def kl_chi_square_upper(P, Q) -> float:
    """Chi-square upper bound (1/ln 2) sum (p_i - q_i)^2 / q_i on D(P||Q)."""
    p, q = _pair(P, Q)
    qpos = q > ZERO_TOL
    if np.any((p > ZERO_TOL) & ~qpos):
        return math.inf
    return _clamp(float(np.sum((p[qpos] - q[qpos]) ** 2 / q[qpos])) / LN2)


def pinsker_lower(P, Q) -> float:
    """Pinsker lower bound ||P - Q||_1^2 / (2 ln 2) on D(P||Q), in bits."""
    p, q = _pair(P, Q)
    l1 = float(np.abs(p - q).sum())
    return l1 * l1 / (2.0 * LN2)
