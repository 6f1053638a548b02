import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kltest.divergence import kl
from kltest.errors import ValidationError
from kltest.simplex import Distribution, EmpiricalDistribution
from kltest.testing import (ONE_SAMPLE, TestVariant, ThresholdSchedule, hoeffding_threshold,
                            one_sample_decide, two_sample_decide, two_sample_threshold)


def test_hoeffding_threshold_examples():
    assert hoeffding_threshold(100, 2, 0.05) == pytest.approx(0.176383510603910, abs=1e-12)
    assert hoeffding_threshold(1, 2, 0.05) == pytest.approx(6.32192809488736, abs=1e-12)
    for n in range(2, 2000, 37):
        assert hoeffding_threshold(2 * n, 3, 0.05) < hoeffding_threshold(n, 3, 0.05)


def test_hoeffding_threshold_makes_sanov_bound_equal_eps():
    for n, d, eps in [(10, 2, 0.05), (333, 3, 0.01), (5000, 4, 0.2)]:
        c = hoeffding_threshold(n, d, eps)
        assert (n + 1) ** d * 2 ** (-n * c) == pytest.approx(eps, rel=1e-9)


@pytest.mark.parametrize("args", [(0, 2, 0.05), (10, 0, 0.05), (10, 2, 0.0), (10, 2, 1.0), (2.5, 2, 0.1)])
def test_threshold_parameter_errors(args):
    with pytest.raises(ValidationError):
        hoeffding_threshold(*args)
    with pytest.raises(ValidationError):
        two_sample_threshold(*args)


def test_two_sample_threshold_examples():
    delta, c = two_sample_threshold(100, 2, 0.05)
    assert delta == pytest.approx(0.186096404744368, abs=1e-12)
    assert c == pytest.approx(0.286096404744368, abs=1e-12)
    for n in (1, 7, 100, 12345):
        delta, c = two_sample_threshold(n, 3, 0.1)
        assert c - delta == pytest.approx(n ** -0.5, rel=1e-12)
    cs = [two_sample_threshold(n, 2, 0.05)[1] for n in (10**2, 10**4, 10**6)]
    assert cs[0] > cs[1] > cs[2] and cs[2] < 2e-3
    # n = 1 keeps the log term at zero
    assert two_sample_threshold(1, 5, 0.5)[0] == pytest.approx(2.0)


def test_gamma_override():
    d1, c1 = two_sample_threshold(400, 2, 0.05, gamma=0.5)
    assert (d1, c1) == two_sample_threshold(400, 2, 0.05)
    d2, c2 = two_sample_threshold(400, 2, 0.05, gamma=0.25)
    assert d2 == d1 and c2 - d2 == pytest.approx(400 ** -0.75)
    with pytest.raises(ValidationError):
        two_sample_threshold(400, 2, 0.05, gamma=1.0)


def test_schedule():
    assert ThresholdSchedule(0.05).thresholds(100, 2) == (None, hoeffding_threshold(100, 2, 0.05))
    assert ThresholdSchedule(0.05, "two").thresholds(100, 2) == two_sample_threshold(100, 2, 0.05)
    with pytest.raises(ValidationError):
        ThresholdSchedule(1.5)


def test_one_sample_decide_examples():
    P = Distribution([0.5, 0.5])
    dec = one_sample_decide(P, EmpiricalDistribution([50, 50], 100), 0.01)
    assert dec.verdict == "H0" and dec.statistic == 0 and dec.variant == ONE_SAMPLE
    dec = one_sample_decide(Distribution([1, 0]), EmpiricalDistribution([0, 4], 4), 10.0)
    assert dec.verdict == "H1" and dec.statistic == math.inf
    # boundary: statistic equal to the threshold is accepted
    qhat = EmpiricalDistribution([3, 1], 4)
    stat = one_sample_decide(P, qhat, 0.0).statistic
    assert one_sample_decide(P, qhat, stat).verdict == "H0"
    with pytest.raises(ValidationError):
        one_sample_decide(P, EmpiricalDistribution([1, 1, 1], 3), 0.1)


def test_one_sample_statistic_matches_kl(rng):
    for _ in range(100):
        d = int(rng.integers(2, 6))
        P = rng.dirichlet(np.ones(d))
        counts = rng.multinomial(int(rng.integers(1, 300)), rng.dirichlet(np.ones(d)))
        e = EmpiricalDistribution.from_counts(counts)
        assert one_sample_decide(P, e, 0.1).statistic == pytest.approx(kl(e.probs, P), abs=1e-12)


def test_two_sample_decide_examples():
    a = EmpiricalDistribution([6, 4], 10)
    for v in TestVariant:
        dec = two_sample_decide(a, a, 0.0, v)
        assert dec.verdict == "H0" and dec.statistic == 0 and dec.variant == v.value
        dec = two_sample_decide(EmpiricalDistribution([5, 0], 5), EmpiricalDistribution([0, 5], 5), 1e9, v)
        assert dec.verdict == "H1" and dec.statistic == math.inf
    dec = two_sample_decide(a, EmpiricalDistribution([5, 5], 10), 0.286096404744368, "forward")
    assert dec.statistic == pytest.approx(0.0290494055453314, abs=1e-12)
    assert dec.verdict == "H0"


def test_two_sample_variants_and_errors():
    a, b = EmpiricalDistribution([7, 3, 0], 10), EmpiricalDistribution([4, 4, 2], 10)
    fwd = two_sample_decide(a, b, 1.0, "forward").statistic
    rev = two_sample_decide(a, b, 1.0, "reverse").statistic
    assert fwd == pytest.approx(kl(a.probs, b.probs), abs=1e-12)
    assert rev == math.inf
    assert two_sample_decide(a, b, 1.0, "min").statistic == fwd
    with pytest.raises(ValidationError, match="unequal"):
        two_sample_decide(a, EmpiricalDistribution([1, 1, 1], 3), 0.5)
    with pytest.raises(ValidationError):
        two_sample_decide(a, EmpiricalDistribution([5, 5], 10), 0.5)
    with pytest.raises(ValidationError, match="variant"):
        two_sample_decide(a, b, 0.5, "sideways")


@given(st.lists(st.integers(0, 8), min_size=3, max_size=3).filter(lambda c: sum(c) > 0),
       st.permutations([0, 1, 2]),
       st.floats(0, 2), st.floats(0, 2))
def test_raising_threshold_never_rejects_more(counts, perm, c1, c2):
    a = EmpiricalDistribution.from_counts(counts)
    b = EmpiricalDistribution.from_counts([counts[i] for i in perm])
    lo, hi = sorted((c1, c2))
    for v in TestVariant:
        if two_sample_decide(a, b, lo, v).accept:
            assert two_sample_decide(a, b, hi, v).accept
    if one_sample_decide([0.2, 0.3, 0.5], a, lo).accept:
        assert one_sample_decide([0.2, 0.3, 0.5], a, hi).accept


def test_decisions_are_pure():
    a, b = EmpiricalDistribution([7, 3], 10), EmpiricalDistribution([4, 6], 10)
    assert two_sample_decide(a, b, 0.1, "min") == two_sample_decide(a, b, 0.1, "min")
