import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from genhill import (
    DegenerateError,
    DomainError,
    RangeError,
    Sample,
    default_k,
    dehaan_resnick,
    half_family,
    hill,
    lo,
    normalizers,
    pickands,
    studentize,
    sweep,
    t_tau,
)
from genhill.estimators import lo_quadratic

E = math.e

positive = arrays(
    np.float64,
    st.integers(min_value=10, max_value=80),
    elements=st.floats(min_value=1e-3, max_value=1e6, allow_nan=False),
    unique=True,
)


def pareto(n, gamma, seed):
    u = np.random.default_rng(seed).random(n)
    return Sample((1 - u) ** -gamma)


def test_sample_validation():
    with pytest.raises(DomainError, match="index 1"):
        Sample([1.0, 0.0, 2.0])
    with pytest.raises(DomainError):
        Sample([1.0, np.nan])
    with pytest.raises(RangeError):
        Sample([3.0])
    s = Sample([1.0, 3.0, 2.0])
    assert list(s.order_stats_desc) == [3.0, 2.0, 1.0]
    with pytest.raises(ValueError):
        s.order_stats_desc[0] = 5.0


def test_from_log_values_matches():
    x = np.array([1.5, 20.0, 3.0, 7.0])
    a, b = Sample(x), Sample.from_log_values(np.log(x))
    assert np.allclose(a.log_order_stats_desc, b.log_order_stats_desc, rtol=0, atol=1e-15)


def test_t_tau_worked_examples():
    s = Sample([E, E**2, E**4])
    assert t_tau(s, 1.0, 2) == pytest.approx(2.0, rel=1e-14)
    assert t_tau(s, 0.5, 1) == pytest.approx(2.0, rel=1e-14)
    assert t_tau(Sample([5.0, 5.0, 5.0]), 0.5, 2) == 0.0


def test_t_tau_domain():
    s = Sample([1.0, 2.0, 3.0])
    for tau in (0.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            t_tau(s, tau, 1)
    for k in (0, 3):
        with pytest.raises(RangeError):
            t_tau(s, 0.5, k)


def test_default_k():
    assert default_k(300) == 73
    assert default_k(10**6, 0.6) == 3982
    assert default_k(2) == 1


def test_pickands():
    # descending X at indices k, 2k, 4k are 4, 2, 1 => ratio 2 => 1
    s = Sample([100.0, 4.0, 2.0, 1.5, 1.0])
    assert pickands(s, 1) == pytest.approx(1.0)
    with pytest.raises(RangeError):
        pickands(Sample([1.0, 2.0, 3.0, 4.0]), 1)
    with pytest.raises(DegenerateError):
        pickands(Sample([9.0, 4.0, 2.0, 2.0, 2.0]), 1)
    assert pickands(Sample([9.0, 3.0, 2.0, 1.5, 1.0]), 1) == 0.0


def test_lo_examples():
    assert lo(Sample([E, E**3]), 1) == pytest.approx(math.sqrt(2))
    assert lo(Sample([2.0] * 5), 3) == 0.0


def test_dehaan_resnick():
    s = Sample([E**5, E**3, E, 1.0])
    assert dehaan_resnick(s, 3) == pytest.approx(5 / math.log(3))
    with pytest.raises(RangeError):
        dehaan_resnick(s, 1)
    assert dehaan_resnick(pareto(10**5, 1.0, 3), default_k(10**5)) > 0


def test_half_family():
    s = pareto(500, 0.5, 4)
    t = t_tau(s, 0.5, 50)
    a_n = normalizers(50, 0.5).a_n
    assert half_family(s, 50, 0.25) == pytest.approx(0.25 * t / 2 + 0.75 * t / a_n)
    for a in (0.0, 1.0):
        with pytest.raises(DomainError):
            half_family(s, 50, a)


def test_studentize_centred():
    s = Sample([E, E**2, E**4, E**5])
    k, tau = 3, 0.4
    gamma = t_tau(s, tau, k) / normalizers(k, tau).a_n
    assert studentize(s, tau, k, gamma) == pytest.approx(0.0, abs=1e-13)


@settings(max_examples=200, deadline=None)
@given(positive)
def test_abel_identity(x):
    s = Sample(x)
    for k in range(1, s.n):
        assert hill(s, k) == pytest.approx(t_tau(s, 1.0, k), rel=1e-12, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(positive, st.floats(min_value=1e-3, max_value=1e3))
def test_scale_invariance(x, c):
    s, sc = Sample(x), Sample(c * x)
    k = s.n // 5
    for fn in (hill, lo, dehaan_resnick, lambda q, k: t_tau(q, 0.3, k), lambda q, k: half_family(q, k, 0.4)):
        assert fn(sc, k) == pytest.approx(fn(s, k), rel=1e-9, abs=1e-11)
    try:
        ref = pickands(s, k)
    except DegenerateError:
        return
    assert pickands(sc, k) == pytest.approx(ref, rel=1e-9, abs=1e-11)


@settings(max_examples=100, deadline=None)
@given(positive)
def test_lo_linear_matches_quadratic(x):
    s = Sample(x)
    for k in (1, s.n // 2, s.n - 1):
        assert lo(s, k) == pytest.approx(lo_quadratic(s, k), rel=1e-10, abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(positive, st.randoms(use_true_random=False))
def test_permutation_invariance(x, rnd):
    y = list(x)
    rnd.shuffle(y)
    a, b = Sample(x), Sample(y)
    k = a.n // 4
    assert t_tau(a, 0.5, k) == t_tau(b, 0.5, k)
    assert lo(a, k) == lo(b, k)
    assert hill(a, k) == hill(b, k)


@settings(max_examples=60, deadline=None)
@given(positive, st.floats(min_value=0.01, max_value=0.99))
def test_nonnegative_and_tau_continuity(x, tau):
    s = Sample(x)
    k = s.n - 1
    v = t_tau(s, tau, k)
    assert v >= 0 and lo(s, k) >= 0
    assert abs(v - t_tau(s, tau + 1e-9, k)) <= 1e-6 * (1 + v)


def test_sweep_records_errors():
    s = pareto(100, 0.5, 1)
    rep = sweep(s, [0.5, 1.0, 2.0], [10, 100], gamma_ref=0.5)
    assert rep.normalized[(1.0, 10)] == pytest.approx(hill(s, 10))
    assert (0.5, 100) in rep.errors and "RangeError" in rep.errors[(0.5, 100)]
    assert (2.0, 10) in rep.errors and "DomainError" in rep.errors[(2.0, 10)]
    rows = rep.rows()
    assert len(rows) == 6 and rows[0]["studentized"] is not None


def test_pareto_estimates_consistent():
    s = pareto(20_000, 0.5, 11)
    k = default_k(s.n)
    assert hill(s, k) == pytest.approx(0.5, abs=0.03)
    assert t_tau(s, 0.5, k) / normalizers(k, 0.5).a_n == pytest.approx(0.5, abs=0.03)
    assert lo(s, k) == pytest.approx(0.5, abs=0.03)
