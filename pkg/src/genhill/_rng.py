"""Counter-based random streams for the hot Monte Carlo loops.

Every draw ``b`` of a campaign gets its own xoshiro256** state, seeded by
splitmix64 from ``(seed, stream, b)``.  Draws are therefore identical no
matter how a batch is split into chunks or across workers.  Unit exponentials
come from a 256-layer ziggurat.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit, uint64

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# stream labels; disjoint labels give independent draws under one seed
STREAM_LIMIT_LAW = 1
STREAM_MIXTURE_TAU = 2
STREAM_MALMQUIST_LEFT = 3
STREAM_MALMQUIST_RIGHT = 4
STREAM_SAMPLE = 5
STREAM_V_STAR = 6


def _splitmix(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def stream_key(seed: int, stream: int) -> int:
    """64-bit key for ``(seed, stream)``; per-draw states derive from it."""
    return _splitmix(_splitmix(int(seed) & _MASK64) ^ (int(stream) & _MASK64))


def _ziggurat_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = 7.69711747013104972
    v = 3.949659822581572e-3
    x = np.empty(257)
    x[0] = v / math.exp(-r)
    x[1] = r
    for i in range(1, 255):
        x[i + 1] = -math.log(math.exp(-x[i]) + v / x[i])
    x[256] = 0.0
    ke = np.empty(256, dtype=np.uint64)
    we = np.empty(256)
    for i in range(256):
        ke[i] = np.uint64(math.floor(2.0**53 * x[i + 1] / x[i]))
        we[i] = x[i] / 2.0**53
    fe = np.exp(-x)
    return ke, we, fe


_KE, _WE, _FE = _ziggurat_tables()
_ZIG_R = 7.69711747013104972
_INV53 = 1.0 / 9007199254740993.0


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(inline="always")
def _seed_state(key, index):
    g = uint64(_GOLDEN)
    z = key ^ _mix(uint64(index) * g + g)
    z += g
    s0 = _mix(z)
    z += g
    s1 = _mix(z)
    z += g
    s2 = _mix(z)
    z += g
    s3 = _mix(z)
    return s0, s1, s2, s3


@njit(inline="always")
def _next(s0, s1, s2, s3):
    t5 = s1 * uint64(5)
    result = ((t5 << uint64(7)) | (t5 >> uint64(57))) * uint64(9)
    t = s1 << uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << uint64(45)) | (s3 >> uint64(19))
    return result, s0, s1, s2, s3


@njit(inline="always")
def _uniform(s0, s1, s2, s3):
    r, s0, s1, s2, s3 = _next(s0, s1, s2, s3)
    # open interval (0, 1)
    return ((r >> uint64(11)) + uint64(1)) * _INV53, s0, s1, s2, s3


@njit(inline="always")
def _exponential(s0, s1, s2, s3, ke, we, fe):
    while True:
        r, s0, s1, s2, s3 = _next(s0, s1, s2, s3)
        idx = r & uint64(0xFF)
        ri = r >> uint64(11)
        x = ri * we[idx]
        if ri < ke[idx]:
            return x, s0, s1, s2, s3
        u, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
        if idx == 0:
            return _ZIG_R - math.log(u), s0, s1, s2, s3
        if (fe[idx + 1] - fe[idx]) * u < math.exp(-x) - fe[idx]:
            return x, s0, s1, s2, s3


@njit(cache=True)
def _weighted_sums(weights, key, start, count, ke, we, fe):
    # weights: (N, T); out[b, t] = sum_j weights[j, t] * (E_j - 1), j descending
    n_terms, n_cols = weights.shape
    out = np.zeros((count, n_cols))
    acc = np.empty(n_cols)
    for b in range(count):
        s0, s1, s2, s3 = _seed_state(key, start + b)
        acc[:] = 0.0
        for j in range(n_terms - 1, -1, -1):
            e, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3, ke, we, fe)
            e -= 1.0
            for t in range(n_cols):
                acc[t] += weights[j, t] * e
        out[b, :] = acc
    return out


@njit(cache=True)
def _weighted_sums_1(w, key, start, count, ke, we, fe):
    n_terms = w.shape[0]
    out = np.empty((count, 1))
    for b in range(count):
        s0, s1, s2, s3 = _seed_state(key, start + b)
        acc = 0.0
        for j in range(n_terms - 1, -1, -1):
            e, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3, ke, we, fe)
            acc += w[j] * (e - 1.0)
        out[b, 0] = acc
    return out


@njit(cache=True)
def _weighted_sums_2(w0, w1, key, start, count, ke, we, fe):
    n_terms = w0.shape[0]
    out = np.empty((count, 2))
    for b in range(count):
        s0, s1, s2, s3 = _seed_state(key, start + b)
        acc0 = 0.0
        acc1 = 0.0
        for j in range(n_terms - 1, -1, -1):
            e, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3, ke, we, fe)
            e -= 1.0
            acc0 += w0[j] * e
            acc1 += w1[j] * e
        out[b, 0] = acc0
        out[b, 1] = acc1
    return out


@njit(cache=True)
def _mixture_sums(log_j, key_tau, key_exp, start, count, tau_hi, ke, we, fe):
    n_terms = log_j.shape[0]
    out = np.empty(count)
    taus = np.empty(count)
    w = np.empty(n_terms)
    for b in range(count):
        s0, s1, s2, s3 = _seed_state(key_tau, start + b)
        u, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
        tau = tau_hi * u
        w[:] = np.exp((tau - 1.0) * log_j)
        s0, s1, s2, s3 = _seed_state(key_exp, start + b)
        acc = 0.0
        norm = 0.0
        for j in range(n_terms - 1, -1, -1):
            e, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3, ke, we, fe)
            acc += w[j] * (e - 1.0)
            norm += w[j] * w[j]
        out[b] = acc / math.sqrt(norm)
        taus[b] = tau
    return out, taus


@njit(cache=True)
def _exponentials(key, start, count, length, ke, we, fe):
    out = np.empty((count, length))
    for b in range(count):
        s0, s1, s2, s3 = _seed_state(key, start + b)
        for j in range(length):
            e, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3, ke, we, fe)
            out[b, j] = e
    return out


def weighted_exponential_sums(
    weights: np.ndarray, seed: int, stream: int, count: int, start: int = 0
) -> np.ndarray:
    """Draws ``sum_j w[j, t] (E_j - 1)`` for draw indices ``start..start+count-1``.

    ``weights`` has shape ``(N, T)``; column ``t`` defines one weighted sum and
    all columns share the same exponentials within a draw.  Returns ``(count, T)``.
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim == 1:
        w = w[:, None]
    key = np.uint64(stream_key(seed, stream))
    start, count = np.int64(start), np.int64(count)
    # specialised kernels keep the accumulators in registers
    if w.shape[1] == 1:
        return _weighted_sums_1(np.ascontiguousarray(w[:, 0]), key, start, count, _KE, _WE, _FE)
    if w.shape[1] == 2:
        w0 = np.ascontiguousarray(w[:, 0])
        w1 = np.ascontiguousarray(w[:, 1])
        return _weighted_sums_2(w0, w1, key, start, count, _KE, _WE, _FE)
    return _weighted_sums(w, key, start, count, _KE, _WE, _FE)


def mixture_sums(
    n_terms: int, seed: int, count: int, start: int = 0, tau_hi: float = 0.5
) -> tuple[np.ndarray, np.ndarray]:
    """Unit-variance weighted sums with a fresh ``tau ~ U(0, tau_hi)`` per draw."""
    log_j = np.log(np.arange(1, n_terms + 1, dtype=np.float64))
    key_tau = np.uint64(stream_key(seed, STREAM_MIXTURE_TAU))
    key_exp = np.uint64(stream_key(seed, STREAM_LIMIT_LAW))
    return _mixture_sums(
        log_j, key_tau, key_exp, np.int64(start), np.int64(count), float(tau_hi), _KE, _WE, _FE
    )


def standard_exponentials(seed: int, stream: int, count: int, length: int, start: int = 0) -> np.ndarray:
    """``(count, length)`` unit exponentials, row ``b`` from draw substream ``start + b``."""
    key = np.uint64(stream_key(seed, stream))
    return _exponentials(key, np.int64(start), np.int64(count), np.int64(length), _KE, _WE, _FE)
