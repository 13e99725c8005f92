"""Samplable tail models defined through their tail quantile functions.

Each :class:`TailModel` carries the extreme value index together with the
slowly varying functions ``p`` and ``b`` of its Karamata (Frechet domain) or
de Haan (Gumbel domain) representation, so that the regularity conditions of
the limit theorems can be evaluated numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from . import _rng
from .estimators import Sample
from .exceptions import ConstructionError, DomainError, RangeError
from .series import normalizers, power_sum

__all__ = [
    "TailModel",
    "ConditionRow",
    "ConditionReport",
    "pareto_model",
    "hall_model",
    "gumbel_weibull_model",
    "model_from_spec",
    "sample",
    "sample_upper",
    "uniform_upper_order_stats",
    "check_conditions",
    "malmquist_pair",
    "malmquist_sample",
    "gev_cdf",
    "frechet_cdf",
]

UFunc = Callable[[np.ndarray], np.ndarray]


def _zero(u):
    return np.zeros_like(np.asarray(u, dtype=np.float64))


@dataclass(frozen=True)
class TailModel:
    """A distribution specified by ``u -> F^{-1}(1 - u)``.

    ``log_quantile_tail`` is ``G^{-1}(1 - u)`` for ``G(x) = F(e^x)``; samplers
    use it directly so that very large quantiles never overflow.
    """

    name: str
    gamma: float
    quantile_tail: UFunc
    log_quantile_tail: UFunc
    p_fn: UFunc = _zero
    b_fn: UFunc = _zero
    s_fn: Optional[UFunc] = None
    params: dict = field(default_factory=dict)

    def survival(self, x):
        """``1 - F(x)`` by numerically inverting the tail quantile (bisection in ``log u``)."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        lo = np.full(x.shape, -745.0)
        hi = np.zeros(x.shape)
        ly = np.log(x)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            # quantile is non-increasing in u: above target means u too small
            above = self.log_quantile_tail(np.exp(mid)) > ly
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return np.exp(hi)

    def cdf(self, x):
        return 1.0 - self.survival(x)


def pareto_model(gamma: float) -> TailModel:
    """Strict Pareto law ``1 - F(x) = x**(-1/gamma)``, ``x >= 1``."""
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    g = float(gamma)
    return TailModel(
        name="pareto",
        gamma=g,
        quantile_tail=lambda u: np.asarray(u, dtype=np.float64) ** (-g),
        log_quantile_tail=lambda u: -g * np.log(u),
        params={"gamma": g, "karamata_c": 1.0},
    )


def hall_model(gamma: float, eta: float, C4: float, grid_size: int = 2000) -> TailModel:
    """Hall-type second-order model ``F^{-1}(1-u) = u^-gamma (1 + C4 u^(eta*gamma))``.

    With ``p = 0`` the Karamata representation has ``c = 1 + C4`` and
    ``b(u) = -C4 eta gamma u^(eta gamma) / (1 + C4 u^(eta gamma))``.
    """
    if not gamma > 0 or not eta > 0:
        raise ConstructionError(f"gamma and eta must be positive, got gamma={gamma}, eta={eta}")
    g, rho, c4 = float(gamma), float(eta) * float(gamma), float(C4)

    def quantile_tail(u):
        u = np.asarray(u, dtype=np.float64)
        return u ** (-g) * (1.0 + c4 * u**rho)

    def log_quantile_tail(u):
        u = np.asarray(u, dtype=np.float64)
        return -g * np.log(u) + np.log1p(c4 * u**rho)

    def b_fn(u):
        ur = np.asarray(u, dtype=np.float64) ** rho
        return -c4 * rho * ur / (1.0 + c4 * ur)

    grid = np.geomspace(1e-12, 1.0, grid_size)
    with np.errstate(invalid="ignore", divide="ignore"):
        q = quantile_tail(grid)
    if not (np.all(np.isfinite(q)) and np.all(q > 0) and np.all(np.diff(q) <= 0)):
        raise ConstructionError(
            f"Hall quantile is not positive and non-increasing on (0, 1] for C4={c4}, eta*gamma={rho}"
        )
    return TailModel(
        name="hall",
        gamma=g,
        quantile_tail=quantile_tail,
        log_quantile_tail=log_quantile_tail,
        b_fn=b_fn,
        params={"gamma": g, "eta": float(eta), "C4": c4, "karamata_c": 1.0 + c4},
    )


def gumbel_weibull_model(beta: float) -> TailModel:
    """Gumbel-domain law with ``log X`` Weibull: ``G^{-1}(1-u) = (-log u)^(1/beta)``.

    ``s_fn`` is the closed-form auxiliary function ``(1/beta)(-log u)^(1/beta-1)``
    used for centering.  The exact de Haan pair that makes the integral
    representation hold identically is kept in ``params`` as
    ``de_haan_s`` (``Gamma(1/beta, -log u) / (beta u)``) and ``de_haan_d``
    (``Gamma(1 + 1/beta)``); both agree with ``s_fn`` as ``u -> 0``.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if beta == 1:
        raise DomainError("beta = 1 makes X exactly Pareto (Frechet domain), not Gumbel")
    inv = 1.0 / float(beta)

    def log_quantile_tail(u):
        return (-np.log(np.asarray(u, dtype=np.float64))) ** inv

    def quantile_tail(u):
        return np.exp(log_quantile_tail(u))

    def s_fn(u):
        return inv * (-np.log(np.asarray(u, dtype=np.float64))) ** (inv - 1.0)

    def de_haan_s(u):
        u = np.asarray(u, dtype=np.float64)
        return special.gammaincc(inv, -np.log(u)) * special.gamma(inv) / (float(beta) * u)

    # b from s = c exp(int_u^1 b(t)/t dt): b(u) = -u d/du log s(u)
    def b_fn(u):
        return (inv - 1.0) / -np.log(np.asarray(u, dtype=np.float64))

    return TailModel(
        name="gumbel_weibull",
        gamma=0.0,
        quantile_tail=quantile_tail,
        log_quantile_tail=log_quantile_tail,
        b_fn=b_fn,
        s_fn=s_fn,
        params={
            "beta": float(beta),
            "de_haan_s": de_haan_s,
            "de_haan_d": float(special.gamma(1.0 + inv)),
        },
    )


def model_from_spec(name: str, **kw) -> TailModel:
    """Build a model by name: ``pareto``, ``hall`` or ``gumbel_weibull``."""
    name = name.strip().lower()
    if name == "pareto":
        return pareto_model(kw.get("gamma", 1.0))
    if name == "hall":
        return hall_model(kw.get("gamma", 0.5), kw.get("eta", 10.0), kw.get("C4", kw.get("c4", -0.5)))
    if name in ("gumbel_weibull", "gumbel", "weibull"):
        return gumbel_weibull_model(kw.get("beta", 2.0))
    raise DomainError(f"unknown model {name!r}")


def _generator(seed: int, stream: int = _rng.STREAM_SAMPLE) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=(stream,)))


def sample(model: TailModel, n: int, seed: int) -> Sample:
    """``n`` i.i.d. draws ``X_i = F^{-1}(1 - U_i)`` by inverse transform."""
    if n < 2:
        raise RangeError(f"n must be >= 2, got {n}")
    rng = _generator(seed)
    # 1 - U lies in (0, 1]
    u = 1.0 - rng.random(n)
    return Sample.from_log_values(model.log_quantile_tail(u))


def uniform_upper_order_stats(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """The ``m`` smallest of ``n`` uniform order statistics ``U_{1,n} < ... < U_{m,n}``.

    Uses ``U_{j,n} = S_j / S_{n+1}`` with ``S_j`` partial sums of unit
    exponentials; the sum of the ``n + 1 - m`` unused exponentials is a single
    gamma variate, so the cost is O(m).
    """
    s = np.cumsum(rng.standard_exponential(m))
    total = s[-1] + rng.standard_gamma(n + 1 - m)
    return s / total


def sample_upper(model: TailModel, n: int, m: int, seed: int) -> Sample:
    """The ``m`` largest of ``n`` i.i.d. model draws, generated exactly in O(m)."""
    if n < 2:
        raise RangeError(f"n must be >= 2, got {n}")
    m = int(min(max(m, 2), n))
    rng = _generator(seed)
    u = uniform_upper_order_stats(n, m, rng)
    return Sample.from_log_values(model.log_quantile_tail(u))


@dataclass(frozen=True)
class ConditionRow:
    n: int
    k: int
    g1: float
    g2: float
    d: float
    c1_lhs: float
    c2_lhs: float
    c3_lhs: float


@dataclass
class ConditionReport:
    lam: float
    tau: float
    rows: list[ConditionRow]

    def decreasing(self) -> dict[str, bool]:
        """Whether each left-hand side is non-increasing along the schedule."""
        out = {}
        for name in ("c1_lhs", "c2_lhs", "c3_lhs"):
            v = np.array([getattr(r, name) for r in self.rows])
            out[name] = bool(np.all(np.diff(v) <= 0))
        return out


def _sup_abs(fn: UFunc, upper: float, points: int) -> float:
    upper = min(upper, 1.0)
    grid = np.geomspace(upper * 1e-15, upper, points)
    with np.errstate(all="ignore"):
        v = np.abs(np.asarray(fn(grid), dtype=np.float64))
    v = v[np.isfinite(v)]
    return float(v.max()) if v.size else 0.0


def check_conditions(
    model: TailModel,
    tau: float,
    lam: float,
    schedule: Sequence[tuple[int, int]],
    grid_points: int = 10_000,
) -> ConditionReport:
    """Evaluate the left-hand sides of the three rate conditions along ``(n, k)`` pairs."""
    if not lam > 1:
        raise DomainError(f"lambda must exceed 1, got {lam}")
    if not 0 < tau <= 0.5:
        raise DomainError(f"tau must lie in (0, 1/2], got {tau}")
    rows = []
    for n, k in sorted(schedule):
        if not 1 <= k <= n - 1:
            raise RangeError(f"need 1 <= k <= n-1, got n={n}, k={k}")
        upper = lam * k / n
        g1 = _sup_abs(model.p_fn, upper, grid_points)
        g2 = _sup_abs(model.b_fn, upper, grid_points)
        d = max(g1, g2 * math.log(k))
        scale = normalizers(k, tau).k_tau_sigma
        sum_tau = power_sum(tau, k)
        sum_tau_1 = power_sum(tau - 1.0, k)
        rows.append(
            ConditionRow(
                n=int(n),
                k=int(k),
                g1=g1,
                g2=g2,
                d=d,
                c1_lhs=g1 * sum_tau / scale,
                c2_lhs=g2 * sum_tau_1 / scale,
                c3_lhs=d * sum_tau_1 / scale,
            )
        )
    return ConditionReport(lam=float(lam), tau=float(tau), rows=rows)


def malmquist_sample(n: int, k: int, tau: float, size: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``size`` independent pairs from :func:`malmquist_pair`, as two arrays."""
    if not 1 <= k <= n - 1:
        raise RangeError(f"need 1 <= k <= n-1, got n={n}, k={k}")
    # U_{j+1,n}/U_{j,n} = S_{j+1}/S_j: the common normaliser S_{n+1} cancels
    e_left = _rng.standard_exponentials(seed, _rng.STREAM_MALMQUIST_LEFT, size, k + 1)
    s = np.cumsum(e_left, axis=1)
    logs = np.log(s[:, 1:]) - np.log(s[:, :-1])
    j = np.arange(1, k + 1, dtype=np.float64)
    # row-wise reductions keep each pair independent of the batch size
    lhs = np.sum(logs * j**tau, axis=1) / k**tau
    e_right = _rng.standard_exponentials(seed, _rng.STREAM_MALMQUIST_RIGHT, size, k)
    rhs = np.sum(e_right * j ** (tau - 1.0), axis=1) / k**tau
    return lhs, rhs


def malmquist_pair(n: int, k: int, tau: float, seed: int) -> tuple[float, float]:
    """One draw of the two sides of the Malmquist identity.

    ``lhs = k^-tau sum_j j^tau log(U_{j+1,n}/U_{j,n})`` from uniform order
    statistics, ``rhs = k^-tau sum_j j^(tau-1) E_j`` from independent
    exponentials.  They agree in distribution, not pointwise.
    """
    lhs, rhs = malmquist_sample(n, k, tau, 1, seed)
    return float(lhs[0]), float(rhs[0])


def gev_cdf(gamma: float, x: float) -> float:
    """Generalized extreme value df ``exp(-(1 + gamma x)^(-1/gamma))``."""
    if abs(gamma) < 1e-8:
        return math.exp(-math.exp(-x))
    z = 1.0 + gamma * x
    if z <= 0:
        return 0.0 if gamma > 0 else 1.0
    return math.exp(-(z ** (-1.0 / gamma)))


def frechet_cdf(alpha: float, x: float) -> float:
    """Frechet df ``exp(-x^-alpha)`` on ``x > 0``."""
    if x <= 0:
        return 0.0
    return math.exp(-(x ** (-alpha)))
