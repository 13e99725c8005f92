"""Deterministic sequences: zeta values, partial zeta sums and the normalizers
``a_n(tau)``, ``sigma_n(tau)`` of the generalized Hill process.

All sums are accumulated from the smallest term to the largest (descending
index for negative exponents), in blocks, so that sums over millions of terms
stay accurate to a few ulps.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import DomainError

__all__ = [
    "ZetaValue",
    "NormalizingConstants",
    "zeta",
    "partial_zeta",
    "power_sum",
    "s_sum",
    "normalizers",
]

_BLOCK = 1 << 20
_MAX_TERMS = 1 << 24
_EPS = 2.0**-52


@dataclass(frozen=True)
class ZetaValue:
    s: float
    value: float
    abs_error_bound: float

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class NormalizingConstants:
    """Exact finite-``k`` centering and scaling of ``T_n(tau)``.

    ``a_n`` is the mean and ``sigma_n`` the standard deviation of
    ``k^-tau * sum_j j^(tau-1) E_j`` for i.i.d. unit exponentials ``E_j``.
    """

    k: int
    tau: float
    a_n: float
    sigma_n: float
    k_tau_sigma: float


def power_sum(p: float, m: int) -> float:
    """Return ``sum_{j=1..m} j**p``, correctly rounded.

    Terms enter smallest first; ``math.fsum`` makes the result exact to the
    last bit, so partial sums are monotone in ``m``.
    """
    m = int(m)
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    p = float(p)
    starts = range(1, m + 1, _BLOCK)
    if p < 0:
        starts = reversed(starts)
    blocks = []
    for lo in starts:
        hi = min(lo + _BLOCK - 1, m)
        j = np.arange(lo, hi + 1, dtype=np.float64)
        terms = j**p
        blocks.append(terms[::-1] if p < 0 else terms)
    return math.fsum(itertools.chain.from_iterable(blocks))


def partial_zeta(s: float, m: int) -> float:
    """Partial zeta sum ``sum_{j=1..m} j**-s``."""
    return power_sum(-float(s), m)


def _em_tail(s: float, m: int) -> tuple[float, float]:
    """Euler-Maclaurin estimate of ``sum_{j>m} j**-s`` and the size of the
    first omitted correction, which bounds the truncation error for this
    completely monotone summand."""
    ms = m ** (-s)
    tail = (
        m * ms / (s - 1.0)
        - 0.5 * ms
        + s * ms / (12.0 * m)
        - s * (s + 1) * (s + 2) * ms / (720.0 * m**3)
    )
    bound = s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * ms / (30240.0 * m**5)
    return tail, bound


def zeta(s: float, target_abs_error: float = 1e-12) -> ZetaValue:
    """Riemann zeta function for real ``s > 1``.

    A direct partial sum up to ``M`` plus an Euler-Maclaurin tail; ``M`` is
    doubled until the truncation bound drops below ``target_abs_error``.
    ``abs_error_bound`` adds an allowance for floating-point rounding.
    """
    s = float(s)
    if not s > 1.0 + 1e-9:
        raise DomainError(f"zeta(s) diverges for s <= 1, got s={s}")
    if not target_abs_error > 0:
        raise DomainError("target_abs_error must be positive")
    m = 8
    tail, bound = _em_tail(s, m)
    while bound > target_abs_error and m < _MAX_TERMS:
        m *= 2
        tail, bound = _em_tail(s, m)
    value = partial_zeta(s, m) + tail
    # rounding in the tail and the final addition
    rounding = abs(value) * _EPS * 8.0
    return ZetaValue(s=s, value=value, abs_error_bound=bound + rounding)


def s_sum(k: int, tau: float) -> float:
    """``S(k, tau) = k**-tau * sum_{j=1..k} j**-tau``."""
    k = int(k)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return k ** (-float(tau)) * power_sum(-float(tau), k)


@lru_cache(maxsize=256)
def _normalizers(k: int, tau: float) -> NormalizingConstants:
    kt = k**tau
    a_n = power_sum(tau - 1.0, k) / kt
    sigma_n = math.sqrt(power_sum(2.0 * tau - 2.0, k)) / kt
    return NormalizingConstants(k=k, tau=tau, a_n=a_n, sigma_n=sigma_n, k_tau_sigma=kt * sigma_n)


def normalizers(k: int, tau: float) -> NormalizingConstants:
    """Exact ``a_n(tau)`` and ``sigma_n(tau)`` for ``k`` top spacings."""
    k = int(k)
    tau = float(tau)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    return _normalizers(k, tau)
