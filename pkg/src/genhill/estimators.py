"""Tail-index statistics built on the top order statistics of a sample.

The central object is the generalized Hill process

    T_n(tau) = k^-tau * sum_{j=1..k} j^tau * (y_j - y_{j+1}),

where ``y_1 >= y_2 >= ...`` are the log order statistics in descending order.
``T_n(1)`` is the Hill estimator and ``T_n(0) / log k`` the de Haan-Resnick
estimator.  Competitors (Pickands, Lo) read the same order statistics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import DegenerateError, DomainError, GenHillError, RangeError
from .series import normalizers

__all__ = [
    "Sample",
    "EstimatorReport",
    "default_k",
    "t_tau",
    "hill",
    "pickands",
    "lo",
    "lo_quadratic",
    "dehaan_resnick",
    "half_family",
    "studentize",
    "sweep",
]


def default_k(n: int, exponent: float = 0.75) -> int:
    """``ceil(n**exponent)`` clipped to ``[1, n - 1]``."""
    # guard against n**e landing a hair above an integer
    k = math.ceil(n**exponent - 1e-9)
    return max(1, min(int(k), n - 1))


class Sample:
    """Positive observations with cached descending order statistics.

    Only the largest observations enter any estimator, so a ``Sample`` may
    also hold just the upper part of a larger sample (see
    :func:`genhill.models.sample_upper`).
    """

    __slots__ = ("_log_desc", "_values", "_desc")

    def __init__(self, values: Iterable[float]):
        x = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
        x = x.ravel()
        if x.size < 2:
            raise RangeError(f"a sample needs at least 2 observations, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise DomainError("sample contains non-finite values")
        bad = np.flatnonzero(x <= 0)
        if bad.size:
            raise DomainError(f"observations must be positive; index {bad[0]} holds {x[bad[0]]!r}")
        desc = np.sort(x)[::-1].copy()
        self._init(x, desc, np.log(desc))

    def _init(self, values, desc, log_desc):
        for a in (values, desc, log_desc):
            a.setflags(write=False)
        self._values = values
        self._desc = desc
        self._log_desc = log_desc

    @classmethod
    def from_log_values(cls, log_values: Iterable[float]) -> "Sample":
        """Build from ``log X``; avoids overflow when ``X`` itself is huge."""
        y = np.asarray(log_values, dtype=np.float64).ravel()
        if y.size < 2:
            raise RangeError(f"a sample needs at least 2 observations, got {y.size}")
        if not np.all(np.isfinite(y)):
            raise DomainError("log-sample contains non-finite values")
        log_desc = np.sort(y)[::-1].copy()
        with np.errstate(over="ignore"):
            desc = np.exp(log_desc)
            values = np.exp(y)
        obj = cls.__new__(cls)
        obj._init(values, desc, log_desc)
        return obj

    @property
    def n(self) -> int:
        return int(self._values.size)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def order_stats_desc(self) -> np.ndarray:
        """``X_{n,n} >= X_{n-1,n} >= ... >= X_{1,n}``."""
        return self._desc

    @property
    def log_order_stats_desc(self) -> np.ndarray:
        """``y_j = log X_{n-j+1,n}`` for ``j = 1..n``."""
        return self._log_desc

    def spacings(self, k: int) -> np.ndarray:
        """Top log-spacings ``y_j - y_{j+1}`` for ``j = 1..k``."""
        _check_k(self, k)
        y = self._log_desc
        return y[:k] - y[1 : k + 1]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Sample(n={self.n})"


def _check_k(sample: Sample, k: int) -> None:
    if not 1 <= k <= sample.n - 1:
        raise RangeError(f"k must satisfy 1 <= k <= n-1 = {sample.n - 1}, got {k}")


def _check_tau(tau: float) -> None:
    if not 0.0 < tau <= 1.0:
        raise DomainError(f"tau must lie in (0, 1], got {tau}")


def _t_tau(sample: Sample, tau: float, k: int) -> float:
    delta = sample.spacings(k)
    if tau == 0.0:
        return float(np.sum(delta))
    j = np.arange(1, k + 1, dtype=np.float64)
    return float(np.dot(j**tau, delta)) / k**tau


def t_tau(sample: Sample, tau: float, k: int) -> float:
    """Generalized Hill statistic ``T_n(tau)`` on the ``k`` top spacings."""
    _check_tau(tau)
    return _t_tau(sample, float(tau), int(k))


def hill(sample: Sample, k: int) -> float:
    """Classical Hill estimator on the ``k`` largest observations."""
    _check_k(sample, k)
    y = sample.log_order_stats_desc
    return float(np.mean(y[:k] - y[k]))


def pickands(sample: Sample, k: int) -> float:
    """Pickands estimator from ``X_{n-k,n}``, ``X_{n-2k,n}`` and ``X_{n-4k,n}``.

    Needs ``4k <= n - 1`` so that ``X_{n-4k,n}`` exists.
    """
    if k < 1 or 4 * k > sample.n - 1:
        raise RangeError(f"Pickands needs 1 <= k and 4k <= n-1 = {sample.n - 1}, got k={k}")
    x = sample.order_stats_desc
    top, mid, low = x[k], x[2 * k], x[4 * k]
    den = mid - low
    if den == 0:
        raise DegenerateError("X_{n-2k,n} == X_{n-4k,n}: zero denominator spacing")
    ratio = (top - mid) / den
    if not ratio > 0:
        raise DegenerateError(f"spacing ratio must be positive, got {ratio}")
    return math.log(ratio) / math.log(2.0)


def lo(sample: Sample, k: int) -> float:
    """Lo estimator, computed in O(k) from suffix sums of the spacings."""
    delta = sample.spacings(k)
    suffix = np.cumsum(delta[::-1])[::-1]
    j = np.arange(1, k + 1, dtype=np.float64)
    l2 = float(np.dot(j * delta, suffix - 0.5 * delta)) / k
    return math.sqrt(max(l2, 0.0))


def lo_quadratic(sample: Sample, k: int) -> float:
    """Lo estimator straight from its double-sum definition (reference, O(k^2))."""
    delta = sample.spacings(k)
    total = 0.0
    for j in range(1, k + 1):
        dj = delta[j - 1]
        for i in range(j, k + 1):
            g = 0.5 if i == j else 1.0
            total += j * g * dj * delta[i - 1]
    return math.sqrt(max(total / k, 0.0))


def dehaan_resnick(sample: Sample, k: int) -> float:
    """``T_n(0) / log k = (log X_{n,n} - log X_{n-k,n}) / log k``."""
    if k < 2:
        raise RangeError(f"de Haan-Resnick needs k >= 2 (log k > 0), got {k}")
    return _t_tau(sample, 0.0, int(k)) / math.log(k)


def half_family(sample: Sample, k: int, a: float) -> float:
    """Blend ``a * (1/2) T_n(1/2) + (1 - a) * T_n(1/2) / a_n(1/2)``."""
    if not 0.0 < a < 1.0:
        raise DomainError(f"a must lie in (0, 1), got {a}")
    t = _t_tau(sample, 0.5, int(k))
    return (0.5 * a + (1.0 - a) / normalizers(k, 0.5).a_n) * t


def studentize(sample: Sample, tau: float, k: int, gamma_ref: float) -> float:
    """``(a_n / sigma_n) * (T_n(tau) / a_n - gamma_ref)`` with exact finite-k constants."""
    _check_tau(tau)
    nc = normalizers(k, tau)
    t = _t_tau(sample, float(tau), int(k))
    return (nc.a_n / nc.sigma_n) * (t / nc.a_n - gamma_ref)


@dataclass
class EstimatorReport:
    """Values of ``T_n(tau)`` and its normalizations on a ``(tau, k)`` grid.

    Cells whose computation failed are absent from the value maps and carry a
    message in ``errors``.
    """

    n: int
    grid: list[tuple[float, int]]
    t_n: dict[tuple[float, int], float] = field(default_factory=dict)
    a_n: dict[tuple[float, int], float] = field(default_factory=dict)
    normalized: dict[tuple[float, int], float] = field(default_factory=dict)
    studentized: Optional[dict[tuple[float, int], float]] = None
    errors: dict[tuple[float, int], str] = field(default_factory=dict)
    gamma_ref: Optional[float] = None

    def rows(self) -> list[dict]:
        out = []
        for cell in self.grid:
            tau, k = cell
            row = {
                "tau": tau,
                "k": k,
                "t_n": self.t_n.get(cell),
                "a_n": self.a_n.get(cell),
                "normalized": self.normalized.get(cell),
                "studentized": None if self.studentized is None else self.studentized.get(cell),
                "error": self.errors.get(cell, ""),
            }
            out.append(row)
        return out


def sweep(
    sample: Sample,
    taus: Sequence[float],
    ks: Sequence[int],
    gamma_ref: Optional[float] = None,
) -> EstimatorReport:
    """Evaluate ``T_n(tau)`` and ``T_n(tau)/a_n(tau)`` on every ``(tau, k)`` cell."""
    grid = [(float(t), int(k)) for t in taus for k in ks]
    report = EstimatorReport(
        n=sample.n,
        grid=grid,
        studentized={} if gamma_ref is not None else None,
        gamma_ref=gamma_ref,
    )
    for cell in grid:
        tau, k = cell
        try:
            t = t_tau(sample, tau, k)
            nc = normalizers(k, tau)
            report.t_n[cell] = t
            report.a_n[cell] = nc.a_n
            report.normalized[cell] = t / nc.a_n
            if gamma_ref is not None:
                report.studentized[cell] = studentize(sample, tau, k, gamma_ref)
        except GenHillError as exc:
            report.errors[cell] = f"{type(exc).__name__}: {exc}"
    return report
