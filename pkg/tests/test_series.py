import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genhill import DomainError, normalizers, partial_zeta, power_sum, s_sum, zeta

# mpmath at 40 digits, frozen
PARTIAL_ZETA_1_4_10000 = 3.042751373103751310134767
ZETA_1_5 = 2.612375348685488343348568
ZETA_1_4 = 3.105547277977580399782927
ZETA_3 = 1.202056903159594285399738
ZETA_1_05 = 20.58084430203700259034069


def test_zeta_closed_forms():
    assert abs(zeta(2).value - math.pi**2 / 6) < 1e-10
    assert abs(zeta(4).value - math.pi**4 / 90) < 1e-10


@pytest.mark.parametrize("s,expected", [(1.5, ZETA_1_5), (1.4, ZETA_1_4), (3.0, ZETA_3), (1.05, ZETA_1_05)])
def test_zeta_against_frozen_high_precision(s, expected):
    z = zeta(s)
    assert abs(z.value - expected) <= z.abs_error_bound
    assert z.abs_error_bound < 1e-10


def test_zeta_direct_sum_oracle():
    # independent route: plain 10^7-term sum plus the integral tail
    m = 10**7
    j = np.arange(m, 0, -1, dtype=np.float64)
    direct = float(np.sum(j**-1.5)) + 2.0 * (m + 0.5) ** -0.5
    assert abs(zeta(1.5).value - direct) < 1e-10


def test_zeta_domain():
    with pytest.raises(DomainError):
        zeta(1.0)
    with pytest.raises(DomainError):
        zeta(0.5)
    assert math.isfinite(zeta(1.001).value)


def test_partial_zeta_small():
    assert partial_zeta(1.0, 1) == 1.0
    assert partial_zeta(2.0, 2) == 1.25
    assert abs(partial_zeta(1.4, 10_000) - PARTIAL_ZETA_1_4_10000) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1.01, max_value=20.0))
def test_zeta_integral_bounds(s):
    v = zeta(s).value
    assert 1 / (s - 1) <= v <= s / (s - 1)
    assert v <= s * (1 + 1 / (s - 1))


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1.05, max_value=8.0), st.integers(min_value=1, max_value=2000))
def test_partial_sums_increase_to_zeta(s, m):
    a, b = partial_zeta(s, m), partial_zeta(s, m + 1)
    assert a <= b
    assert b <= zeta(s).value + zeta(s).abs_error_bound


def test_power_sum_block_boundary():
    # spans two summation blocks
    m = (1 << 20) + 5
    j = np.arange(1, m + 1, dtype=np.float64)
    assert power_sum(-0.7, m) == pytest.approx(float(np.sum(j**-0.7)), rel=1e-12)
    with pytest.raises(DomainError):
        power_sum(1.0, 0)


def test_s_sum_examples():
    assert s_sum(1, 0.7) == 1.0
    assert abs(s_sum(10**6, 0.5) - 2) < 2e-3
    assert abs(s_sum(10**5, 2) * (10**5) ** 2 - math.pi**2 / 6) < 1e-4


ASYMPTOTIC_FORMS = {
    2.0: lambda k: zeta(2.0).value * k**-2.0,
    1.0: lambda k: math.log(k) / k,
    0.5: lambda k: 2.0,
    0.3: lambda k: k ** (1 - 0.6) / 0.7,
}


@pytest.mark.parametrize("tau", sorted(ASYMPTOTIC_FORMS))
def test_s_sum_rate_ratios_converge(tau):
    ks = [10**e for e in range(2, 7)]
    dev = [abs(s_sum(k, tau) / ASYMPTOTIC_FORMS[tau](k) - 1) for k in ks]
    assert all(b <= a + 1e-9 for a, b in zip(dev, dev[1:]))
    assert dev[-1] < 0.05


def test_normalizers_k1():
    nc = normalizers(1, 0.5)
    assert nc.a_n == 1.0 and nc.sigma_n == 1.0


def test_normalizers_limits():
    assert abs(normalizers(10**6, 0.3).k_tau_sigma - math.sqrt(ZETA_1_4)) < 1e-2
    assert abs(normalizers(10**5, 0.5).a_n - 2) < 1e-2


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=5000), st.floats(min_value=0.01, max_value=1.0))
def test_sigma_two_summation_orders(k, tau):
    j = np.arange(1, k + 1, dtype=np.float64)
    forward = math.fsum(j ** (2 * tau - 2)) * k ** (-2 * tau)
    nc = normalizers(k, tau)
    assert nc.sigma_n**2 == pytest.approx(forward, rel=1e-12)
    assert nc.a_n > 0 and nc.sigma_n > 0
    assert nc.k_tau_sigma == pytest.approx(math.sqrt(partial_zeta(2 * (1 - tau), k)), rel=1e-12)


def test_normalizers_domain():
    with pytest.raises(DomainError):
        normalizers(10, 0.0)
    with pytest.raises(DomainError):
        normalizers(0, 0.5)
