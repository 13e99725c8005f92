"""The non-Gaussian limit law ``L(tau)`` of the generalized Hill process.

    L(tau) = zeta(2(1 - tau))^{-1/2} * sum_{j >= 1} j^{tau - 1} (E_j - 1),

for ``0 < tau < 1/2`` and i.i.d. unit exponentials ``E_j``.  Draws use the
series truncated at ``N`` terms and normalized by the partial zeta sum, so
every truncated draw has mean 0 and variance exactly 1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _rng
from .exceptions import DomainError
from .series import normalizers, partial_zeta, zeta

__all__ = [
    "LimitLawSpec",
    "LimitLawSample",
    "sample_limit_law",
    "sample_limit_law_many",
    "sample_limit_law_mixture",
    "empirical_cdf",
    "empirical_quantile",
    "cf_psi_infinity",
    "cf_domain_radius",
    "cumulant",
    "moments",
    "Moments",
    "sample_v_star",
    "sample_v_star_many",
]

DEFAULT_N = 10_000
# draws per kernel call; bounds memory, never changes the draws
_CHUNK = 1 << 14


def _check_open_tau(tau: float) -> None:
    if not 0.0 < tau < 0.5:
        raise DomainError(f"tau must lie in (0, 1/2), got {tau}")


@dataclass(frozen=True)
class LimitLawSpec:
    tau: float
    truncation_N: int = DEFAULT_N
    zeta_norm: Optional[float] = None

    def __post_init__(self):
        _check_open_tau(self.tau)
        if self.truncation_N < 1:
            raise DomainError(f"truncation_N must be >= 1, got {self.truncation_N}")
        if self.zeta_norm is None:
            object.__setattr__(self, "zeta_norm", partial_zeta(2.0 * (1.0 - self.tau), self.truncation_N))
        if not self.zeta_norm > 0:
            raise DomainError("zeta_norm must be positive")

    def weights(self) -> np.ndarray:
        j = np.arange(1, self.truncation_N + 1, dtype=np.float64)
        return j ** (self.tau - 1.0) / math.sqrt(self.zeta_norm)


@dataclass
class LimitLawSample:
    """Seeded draws of ``L(tau, N)`` (or the uniform-``tau`` mixture when ``spec`` is None)."""

    spec: Optional[LimitLawSpec]
    draws: np.ndarray
    seed: int
    mixture: bool = False
    truncation_N: int = DEFAULT_N
    mixture_taus: Optional[np.ndarray] = None
    _sorted: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=np.float64)
        if self.draws.size == 0:
            raise DomainError("a limit-law sample needs at least one draw")
        self._sorted = np.sort(self.draws)

    @property
    def B(self) -> int:
        return int(self.draws.size)

    @property
    def label(self) -> str:
        return "unif" if self.mixture else repr(self.spec.tau)

    def cdf(self, u):
        """Empirical df (fraction of draws ``<= u``); accepts scalars or arrays."""
        res = np.searchsorted(self._sorted, u, side="right") / self.B
        return float(res) if np.ndim(res) == 0 else res

    def quantile(self, p: float) -> float:
        """Smallest draw whose empirical df is ``>= p``."""
        if not 0.0 < p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {p}")
        levels = np.arange(1, self.B + 1, dtype=np.float64) / self.B
        return float(self._sorted[np.searchsorted(levels, p, side="left")])


def _chunked(fn, count: int):
    parts = []
    for start in range(0, count, _CHUNK):
        parts.append(fn(start, min(_CHUNK, count - start)))
    return np.concatenate(parts, axis=0)


def sample_limit_law(spec: LimitLawSpec, B: int, seed: int) -> LimitLawSample:
    """``B`` draws of ``zeta_norm^{-1/2} sum_{j<=N} j^{tau-1}(E_j - 1)``.

    Draw ``b`` depends only on ``(seed, b)``, not on ``spec``: samples of
    several ``tau`` under one seed share their exponentials.
    """
    if B < 1:
        raise DomainError(f"B must be >= 1, got {B}")
    w = spec.weights()
    draws = _chunked(
        lambda s, c: _rng.weighted_exponential_sums(w, seed, _rng.STREAM_LIMIT_LAW, c, start=s), B
    )[:, 0]
    return LimitLawSample(spec=spec, draws=draws, seed=seed, truncation_N=spec.truncation_N)


def sample_limit_law_many(
    taus: Sequence[float], B: int, seed: int, N: int = DEFAULT_N
) -> list[LimitLawSample]:
    """One pass over the exponentials for several ``tau``.

    Bit-identical to calling :func:`sample_limit_law` for each ``tau`` with
    the same seed, at the cost of a single exponential stream.
    """
    if B < 1:
        raise DomainError(f"B must be >= 1, got {B}")
    specs = [LimitLawSpec(float(t), N) for t in taus]
    out: list[LimitLawSample] = []
    # the fused kernels are specialised for one or two columns
    for i in range(0, len(specs), 2):
        group = specs[i : i + 2]
        w = np.stack([s.weights() for s in group], axis=1)
        draws = _chunked(
            lambda s, c: _rng.weighted_exponential_sums(w, seed, _rng.STREAM_LIMIT_LAW, c, start=s), B
        )
        for col, spec in enumerate(group):
            out.append(LimitLawSample(spec=spec, draws=draws[:, col].copy(), seed=seed, truncation_N=N))
    return out


def sample_limit_law_mixture(B: int, seed: int, N: int = DEFAULT_N) -> LimitLawSample:
    """Draws of ``L(tau, N)`` with an independent ``tau ~ U(0, 1/2)`` per draw."""
    if B < 1:
        raise DomainError(f"B must be >= 1, got {B}")
    draws, taus = [], []
    for start in range(0, B, _CHUNK):
        d, t = _rng.mixture_sums(N, seed, min(_CHUNK, B - start), start=start)
        draws.append(d)
        taus.append(t)
    return LimitLawSample(
        spec=None,
        draws=np.concatenate(draws),
        seed=seed,
        mixture=True,
        truncation_N=N,
        mixture_taus=np.concatenate(taus),
    )


def empirical_cdf(sample: LimitLawSample, u: float) -> float:
    return sample.cdf(u)


def empirical_quantile(sample: LimitLawSample, p: float) -> float:
    return sample.quantile(p)


def cf_domain_radius(tau: float) -> float:
    """Largest ``|t|`` for which the cumulant series of ``psi_inf`` is evaluated.

    The series converges for ``|t| < sqrt(zeta(2(1 - tau)))`` (the ``j = 1``
    factor has a pole there); the evaluation is further restricted to
    ``|t| < 2(1 - tau)``.
    """
    _check_open_tau(tau)
    return min(2.0 * (1.0 - tau), math.sqrt(zeta(2.0 * (1.0 - tau)).value))


def cf_psi_infinity(tau: float, t: float, tol: float = 1e-12) -> complex:
    """Characteristic function of ``L(tau)`` from its cumulant series.

    ``log psi(t) = sum_{n>=2} (it)^n / n * zeta(n(1-tau)) * zeta(2(1-tau))^{-n/2}``.
    Since ``zeta(n(1-tau)) <= z2 = zeta(2(1-tau))``, the tail after term ``M``
    is at most ``z2 r^{M+1} / ((M+1)(1-r))`` with ``r = |t|/sqrt(z2)``; the sum
    stops once that bound is below ``tol``.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    radius = cf_domain_radius(tau)
    if abs(t) >= radius:
        raise DomainError(f"|t| = {abs(t)} outside the convergence region |t| < {radius:.6g}")
    if t == 0:
        return 1.0 + 0.0j
    z2 = zeta(2.0 * (1.0 - tau)).value
    r = abs(t) / math.sqrt(z2)
    total = 0.0j
    n = 2
    while True:
        zn = zeta(n * (1.0 - tau), 1e-15).value
        total += (1j * t) ** n / n * zn * z2 ** (-n / 2.0)
        if z2 * r ** (n + 1) / ((n + 1) * (1.0 - r)) < tol:
            break
        n += 1
    return cmath.exp(total)


def cumulant(m: int, tau: float, N: Optional[int] = None) -> float:
    """``m``-th cumulant ``(m-1)! zeta(m(1-tau)) zeta(2(1-tau))^{-m/2}`` of ``L(tau)``.

    With ``N`` given, the same quantity for the series truncated at ``N``
    terms (partial zeta sums throughout).
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    _check_open_tau(tau)
    if m == 1:
        return 0.0
    if N is None:
        zm = zeta(m * (1.0 - tau)).value
        z2 = zeta(2.0 * (1.0 - tau)).value
    else:
        zm = partial_zeta(m * (1.0 - tau), N)
        z2 = partial_zeta(2.0 * (1.0 - tau), N)
    return math.factorial(m - 1) * zm * z2 ** (-m / 2.0)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    third: float
    fourth: float
    skewness: float
    excess_kurtosis: float


def moments(tau: float) -> Moments:
    """First four moments of ``L(tau)`` from its zeta cumulants."""
    k3 = cumulant(3, tau)
    k4 = cumulant(4, tau)
    return Moments(mean=0.0, variance=1.0, third=k3, fourth=3.0 + k4, skewness=k3, excess_kurtosis=k4)


def _v_star_weights(tau: float, k: int) -> np.ndarray:
    if not 0.0 < tau <= 0.5:
        raise DomainError(f"tau must lie in (0, 1/2], got {tau}")
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    nc = normalizers(k, tau)
    j = np.arange(1, k + 1, dtype=np.float64)
    return j ** (tau - 1.0) / nc.k_tau_sigma


def sample_v_star_many(tau: float, k: int, B: int, seed: int) -> np.ndarray:
    """``B`` draws of ``(k^tau sigma_n)^{-1} sum_{j<=k} j^{tau-1}(E_j - 1)``."""
    w = _v_star_weights(tau, k)
    return _chunked(lambda s, c: _rng.weighted_exponential_sums(w, seed, _rng.STREAM_V_STAR, c, start=s), B)[
        :, 0
    ]


def sample_v_star(tau: float, k: int, seed: int) -> float:
    """One draw of the standardized exponential sum ``V*_n(tau)``."""
    return float(sample_v_star_many(tau, k, 1, seed)[0])
