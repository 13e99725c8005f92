import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genhill import DomainError, partial_zeta, zeta
from genhill.limitlaw import (
    LimitLawSample,
    LimitLawSpec,
    cf_domain_radius,
    cf_psi_infinity,
    cumulant,
    moments,
    sample_limit_law,
    sample_limit_law_many,
    sample_limit_law_mixture,
    sample_v_star,
    sample_v_star_many,
)

# mpmath cumulant series at 20 digits, frozen
PSI_0_3_HALF = complex(0.88414554270498873675, -0.010154876732304940766)


def test_spec_validation():
    for tau in (0.0, 0.5, -0.1):
        with pytest.raises(DomainError):
            LimitLawSpec(tau)
    with pytest.raises(DomainError):
        LimitLawSpec(0.3, 0)
    spec = LimitLawSpec(0.3, 100)
    assert spec.zeta_norm == partial_zeta(1.4, 100)
    assert np.sum(spec.weights() ** 2) == pytest.approx(1.0, rel=1e-12)


def test_reproducible_and_chunk_invariant():
    spec = LimitLawSpec(0.3, 500)
    a = sample_limit_law(spec, 300, 7)
    b = sample_limit_law(spec, 300, 7)
    assert np.array_equal(a.draws, b.draws)
    head = sample_limit_law(spec, 120, 7)
    assert np.array_equal(head.draws, a.draws[:120])
    assert not np.array_equal(sample_limit_law(spec, 300, 8).draws, a.draws)


def test_many_matches_single():
    taus = [0.1, 0.25, 0.4]
    many = sample_limit_law_many(taus, 200, 3, N=400)
    for tau, s in zip(taus, many):
        assert np.array_equal(s.draws, sample_limit_law(LimitLawSpec(tau, 400), 200, 3).draws)


def test_unit_variance():
    s = sample_limit_law(LimitLawSpec(0.3, 2000), 100_000, 5)
    assert abs(np.mean(s.draws)) < 0.02
    assert np.var(s.draws) == pytest.approx(1.0, abs=0.03)


def test_edf_and_quantile():
    s = LimitLawSample(spec=LimitLawSpec(0.3, 10), draws=[3.0, 1.0, 2.0, 2.0], seed=0)
    assert s.cdf(0.5) == 0.0 and s.cdf(2.0) == 0.75 and s.cdf(3.0) == 1.0
    assert s.quantile(0.25) == 1.0 and s.quantile(0.26) == 2.0 and s.quantile(0.75) == 2.0
    with pytest.raises(DomainError):
        s.quantile(1.0)
    one = sample_limit_law(LimitLawSpec(0.3, 10), 1, 0)
    assert one.cdf(-1.96) in (0.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.001, max_value=0.999), st.floats(min_value=-4, max_value=4))
def test_quantile_edf_galois(p, x):
    s = sample_limit_law(LimitLawSpec(0.2, 200), 257, 1)
    assert 0.0 <= s.cdf(x) <= 1.0
    assert (s.quantile(p) <= x) == (p <= s.cdf(x))
    assert s.cdf(x) <= s.cdf(x + 0.1)


def test_mixture_taus_in_range():
    m = sample_limit_law_mixture(2000, 4, N=300)
    assert m.label == "unif" and m.mixture
    assert np.all((m.mixture_taus > 0) & (m.mixture_taus < 0.5))
    assert np.var(m.draws) == pytest.approx(1.0, abs=0.1)


def test_cf_against_frozen_series():
    assert abs(cf_psi_infinity(0.3, 0.5) - PSI_0_3_HALF) < 1e-12


def test_cf_domain():
    assert cf_psi_infinity(0.3, 0.0) == 1.0
    assert cf_domain_radius(0.1) == pytest.approx(math.sqrt(zeta(1.8).value))
    assert cf_domain_radius(0.3) == pytest.approx(1.4)
    with pytest.raises(DomainError):
        cf_psi_infinity(0.3, 1.4)
    with pytest.raises(DomainError):
        cf_psi_infinity(0.1, 1.9)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.45), st.floats(min_value=-0.95, max_value=0.95))
def test_cf_bounded(tau, frac):
    t = frac * cf_domain_radius(tau)
    assert abs(cf_psi_infinity(tau, t)) <= 1.0 + 1e-12


def test_cf_second_derivative():
    h = 1e-3
    d2 = (cf_psi_infinity(0.3, h) - 2 + cf_psi_infinity(0.3, -h)) / h**2
    assert d2.real == pytest.approx(-1.0, abs=1e-3)


def test_cf_matches_finite_product():
    # exact CF of the N-term truncation: prod exp(-i t w)/(1 - i t w)
    tau, t = 0.3, 0.8
    w = LimitLawSpec(tau, 10**6, zeta_norm=zeta(1.4).value).weights()
    log_cf = np.sum(-1j * t * w - np.log(1 - 1j * t * w))
    assert abs(cf_psi_infinity(tau, t) - np.exp(log_cf)) < 2e-3


@pytest.mark.parametrize("m", [3, 4])
@pytest.mark.parametrize("tau", [0.1, 0.3, 0.45])
def test_cumulant_brute_force(m, tau):
    N = 10_000
    w = np.arange(1, N + 1, dtype=np.float64) ** (tau - 1) / math.sqrt(partial_zeta(2 * (1 - tau), N))
    brute = math.factorial(m - 1) * math.fsum(w**m)
    assert cumulant(m, tau, N) == pytest.approx(brute, rel=1e-10)


def test_moments():
    m = moments(0.3)
    z2 = zeta(1.4).value
    assert m.skewness == pytest.approx(2 * zeta(2.1).value / z2**1.5)
    assert m.fourth == pytest.approx(3 + 6 * zeta(2.8).value / z2**2)
    assert cumulant(2, 0.3) == pytest.approx(1.0)
    assert cumulant(1, 0.3) == 0.0


def test_v_star():
    d = sample_v_star_many(0.5, 200, 20_000, 9)
    assert abs(np.mean(d)) < 0.03 and np.var(d) == pytest.approx(1.0, abs=0.05)
    assert sample_v_star(0.5, 200, 9) == d[0]
    with pytest.raises(DomainError):
        sample_v_star(0.6, 10, 0)
