"""scikit-learn style wrappers around the tail-index statistics.

Each estimator takes a one-dimensional sample of positive values in ``fit``
and exposes the estimate as ``gamma_``::

    >>> est = GeneralizedHillEstimator(tau=0.5).fit(x)
    >>> est.gamma_
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from . import estimators as est
from .exceptions import DomainError
from .series import normalizers

__all__ = [
    "check_sample",
    "GeneralizedHillEstimator",
    "HillEstimator",
    "PickandsEstimator",
    "LoEstimator",
    "DeHaanResnickEstimator",
    "HalfFamilyEstimator",
]


def check_sample(X) -> est.Sample:
    """Validate array-like input and wrap it as a :class:`~genhill.estimators.Sample`.

    Accepts a 1-d array or a single-column 2-d array.
    """
    if isinstance(X, est.Sample):
        return X
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, ensure_min_samples=2, dtype=np.float64)
    if arr.shape[1] != 1:
        raise DomainError(f"expected a single column of observations, got shape {arr.shape}")
    return est.Sample(arr[:, 0])


class _TailIndexEstimator(BaseEstimator):
    k: Optional[int]
    k_exponent: float

    def _resolve_k(self, sample: est.Sample) -> int:
        if self.k is not None:
            return int(self.k)
        return est.default_k(sample.n, self.k_exponent)

    def fit(self, X, y=None):
        sample = check_sample(X)
        self.k_ = self._resolve_k(sample)
        self.n_ = sample.n
        self.gamma_ = float(self._estimate(sample, self.k_))
        return self

    def _estimate(self, sample: est.Sample, k: int) -> float:
        raise NotImplementedError

    def predict(self, X=None) -> float:
        """The fitted tail index (``X`` is ignored)."""
        check_is_fitted(self, "gamma_")
        return self.gamma_

    def score(self, X, y=None) -> float:
        """Negative squared distance between the estimate on ``X`` and the fitted one."""
        check_is_fitted(self, "gamma_")
        sample = check_sample(X)
        return -((self._estimate(sample, self._resolve_k(sample)) - self.gamma_) ** 2)


class GeneralizedHillEstimator(_TailIndexEstimator):
    """``T_n(tau) / a_n(tau)``, the normalized generalized Hill statistic.

    Parameters
    ----------
    tau : float in (0, 1]
    k : int, optional
        Number of top spacings; ``ceil(n ** k_exponent)`` when None.
    k_exponent : float
    """

    def __init__(self, tau: float = 0.5, k: Optional[int] = None, k_exponent: float = 0.75):
        self.tau = tau
        self.k = k
        self.k_exponent = k_exponent

    def _estimate(self, sample, k):
        return est.t_tau(sample, self.tau, k) / normalizers(k, self.tau).a_n

    def fit(self, X, y=None):
        super().fit(X, y)
        self.statistic_ = self.gamma_ * normalizers(self.k_, self.tau).a_n
        return self

    def studentize(self, gamma_ref: float) -> float:
        """Finite-k studentized deviation of the fitted statistic from ``gamma_ref``."""
        check_is_fitted(self, "gamma_")
        nc = normalizers(self.k_, self.tau)
        return (nc.a_n / nc.sigma_n) * (self.gamma_ - gamma_ref)


class HillEstimator(_TailIndexEstimator):
    def __init__(self, k: Optional[int] = None, k_exponent: float = 0.75):
        self.k = k
        self.k_exponent = k_exponent

    def _estimate(self, sample, k):
        return est.hill(sample, k)


class PickandsEstimator(_TailIndexEstimator):
    def __init__(self, k: Optional[int] = None, k_exponent: float = 0.75):
        self.k = k
        self.k_exponent = k_exponent

    def _estimate(self, sample, k):
        return est.pickands(sample, k)


class LoEstimator(_TailIndexEstimator):
    def __init__(self, k: Optional[int] = None, k_exponent: float = 0.75):
        self.k = k
        self.k_exponent = k_exponent

    def _estimate(self, sample, k):
        return est.lo(sample, k)


class DeHaanResnickEstimator(_TailIndexEstimator):
    def __init__(self, k: Optional[int] = None, k_exponent: float = 0.75):
        self.k = k
        self.k_exponent = k_exponent

    def _estimate(self, sample, k):
        return est.dehaan_resnick(sample, k)


class HalfFamilyEstimator(_TailIndexEstimator):
    """Blend of the two ``tau = 1/2`` normalizations, weighted by ``a``."""

    def __init__(self, a: float = 0.5, k: Optional[int] = None, k_exponent: float = 0.75):
        self.a = a
        self.k = k
        self.k_exponent = k_exponent

    def _estimate(self, sample, k):
        return est.half_family(sample, k, self.a)
