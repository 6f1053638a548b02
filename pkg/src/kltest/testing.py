"""Threshold schedules and the one- and two-sample relative-entropy tests."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ValidationError
from .simplex import ZERO_TOL, Distribution, EmpiricalDistribution, as_probs, min_positive_prob

ONE_SAMPLE = "one-sample"


class TestVariant(str, enum.Enum):
    """Which empirical relative entropy the two-sample test thresholds."""

    __test__ = False  # keep pytest from collecting this

    FORWARD = "forward"  # D(P_hat || Q_hat)
    REVERSE = "reverse"  # D(Q_hat || P_hat)
    MIN = "min"

    @property
    def code(self) -> int:
        return {"forward": _kernels.FORWARD, "reverse": _kernels.REVERSE, "min": _kernels.MIN}[self.value]

    @classmethod
    def parse(cls, value) -> "TestVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown test variant {value!r}; expected forward, reverse or min") from None


@dataclass(frozen=True)
class ThresholdSchedule:
    """Level ``eps`` plus the rule turning a sample size into thresholds."""

    eps: float
    kind: str = "one"
    gamma: float | None = None

    def __post_init__(self):
        _check_eps(self.eps)
        if self.kind not in ("one", "two"):
            raise ValidationError(f"schedule kind must be 'one' or 'two', got {self.kind!r}")
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise ValidationError(f"gamma must lie in (0, 1), got {self.gamma!r}")

    def thresholds(self, n: int, d: int) -> tuple[float | None, float]:
        """``(delta_n, c_n)``; ``delta_n`` is None for the one-sample schedule."""
        if self.kind == "one":
            return None, hoeffding_threshold(n, d, self.eps)
        return two_sample_threshold(n, d, self.eps, gamma=self.gamma)


@dataclass(frozen=True)
class Decision:
    verdict: str  # "H0" or "H1"
    statistic: float
    threshold: float
    variant: str

    @property
    def accept(self) -> bool:
        return self.verdict == "H0"


def _check_eps(eps):
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"eps must lie strictly inside (0, 1), got {eps!r}")


def _check_nd(n, d):
    if int(n) != n or n < 1:
        raise ValidationError(f"sample count must be a positive integer, got {n!r}")
    if int(d) != d or d < 1:
        raise ValidationError(f"alphabet size must be a positive integer, got {d!r}")


def hoeffding_threshold(n: int, d: int, eps: float) -> float:
    """Radius c_n = (d log2(n+1) + log2(1/eps)) / n of the one-sample acceptance ball.

    With this radius the Sanov bound (n+1)^d 2^(-n c_n) equals ``eps``.
    """
    _check_nd(n, d)
    _check_eps(eps)
    return (d * math.log2(n + 1) + math.log2(1.0 / eps)) / n


def two_sample_threshold(n: int, d: int, eps: float, gamma: float | None = None) -> tuple[float, float]:
    """Return ``(delta_n, c_n)`` for the two-sample test.

    ``delta_n = (1 + log2(1/eps))/n + d log2(n)/n`` and ``c_n = delta_n + n^(-1/2)``.
    Passing ``gamma`` in (0, 1) replaces the ``n^(-1/2)`` slack by ``n^(gamma - 1)``.
    """
    _check_nd(n, d)
    _check_eps(eps)
    delta = (1.0 + math.log2(1.0 / eps)) / n + d * math.log2(n) / n
    if gamma is None:
        slack = n ** -0.5
    else:
        if not 0.0 < gamma < 1.0:
            raise ValidationError(f"gamma must lie in (0, 1), got {gamma!r}")
        slack = n ** (gamma - 1.0)
    return delta, delta + slack


def _log2_law(P) -> np.ndarray:
    p = as_probs(P)
    out = np.full(p.shape, -np.inf)
    pos = p > ZERO_TOL
    out[pos] = np.log2(p[pos])
    return out


def one_sample_statistic(P: Distribution, Qhat: EmpiricalDistribution) -> float:
    """D(Qhat || P) in bits, evaluated from counts exactly as the oracle does."""
    p = as_probs(P)
    if p.size != Qhat.d:
        raise ValidationError(f"alphabet sizes differ: {p.size} vs {Qhat.d}")
    tab = _kernels.log2_table(Qhat.n)
    stat = _kernels.np_law_stats(Qhat.counts[None, :], tab, Qhat.n, _log2_law(p))[0]
    return max(float(stat), 0.0)


def two_sample_statistic(Phat: EmpiricalDistribution, Qhat: EmpiricalDistribution,
                         variant: TestVariant | str = TestVariant.FORWARD) -> float:
    variant = TestVariant.parse(variant)
    if Phat.d != Qhat.d:
        raise ValidationError(f"alphabet sizes differ: {Phat.d} vs {Qhat.d}")
    if Phat.n != Qhat.n:
        raise ValidationError(
            f"unequal sample sizes ({Phat.n} vs {Qhat.n}) are not supported by this test")
    tab = _kernels.log2_table(Phat.n)
    stat = _kernels.np_pair_stats(Phat.counts[None, :], Qhat.counts[None, :], tab, Phat.n, variant.code)[0]
    return max(float(stat), 0.0)


def one_sample_decide(P: Distribution, Qhat: EmpiricalDistribution, c: float) -> Decision:
    """Accept H0 iff the empirical law lies in the KL ball of radius ``c`` around ``P``."""
    if c < 0:
        raise ValidationError(f"threshold must be nonnegative, got {c!r}")
    stat = one_sample_statistic(P, Qhat)
    return Decision("H0" if stat <= c else "H1", stat, float(c), ONE_SAMPLE)


def two_sample_decide(Phat: EmpiricalDistribution, Qhat: EmpiricalDistribution, c: float,
                      variant: TestVariant | str = TestVariant.FORWARD) -> Decision:
    """Accept H0 iff the empirical relative entropy of the two samples is at most ``c``.

    Both samples must have the same length.
    """
    variant = TestVariant.parse(variant)
    if c < 0:
        raise ValidationError(f"threshold must be nonnegative, got {c!r}")
    stat = two_sample_statistic(Phat, Qhat, variant)
    return Decision("H0" if stat <= c else "H1", stat, float(c), variant.value)


def support_violation_onset(P, eps: float, d: int | None = None) -> int:
    """Smallest n with c_n < p_min^2 / (2 ln 2).

    From this n on, Pinsker's inequality forces every accepted one-sample type
    to put mass on every symbol of supp(P); so if Q misses part of that
    support the type II error is exactly zero. ``c_n`` decreases in n, so the
    condition persists once met.
    """
    p = as_probs(P)
    d = p.size if d is None else d
    target = min_positive_prob(p) ** 2 / (2.0 * math.log(2.0))
    hi = 1
    while hoeffding_threshold(hi, d, eps) >= target:
        hi *= 2
    lo = max(hi // 2, 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if hoeffding_threshold(mid, d, eps) < target:
            hi = mid
        else:
            lo = mid + 1
    return hi
