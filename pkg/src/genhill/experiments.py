"""Seeded Monte Carlo campaigns and Kolmogorov-Smirnov machinery.

Every replication ``r`` draws its sample from a seed derived from
``(master_seed, r)``, so results do not depend on the number of workers;
records are sorted by replication index before aggregation or output.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import estimators as est
from . import limitlaw, models
from .exceptions import DomainError, GenHillError
from .series import normalizers

log = logging.getLogger(__name__)

__all__ = [
    "kolmogorov_sf",
    "ks_one_sample",
    "ks_two_sample",
    "KRule",
    "ExperimentConfig",
    "Aggregate",
    "ExperimentResult",
    "TestRecord",
    "replication_seed",
    "run_table2",
    "run_table1",
    "Table1Result",
    "run_normality_check",
    "run_limit_agreement",
    "run_gumbel_check",
    "format_float",
    "write_csv",
]

# ---------------------------------------------------------------- KS tests


def kolmogorov_sf(lam: float, tol: float = 1e-10) -> float:
    """``P(K > lam)`` for the asymptotic Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        # theta-function form converges fast for small lambda
        c = math.sqrt(2.0 * math.pi) / lam
        s = 0.0
        j = 1
        while True:
            term = math.exp(-((2 * j - 1) ** 2) * math.pi**2 / (8.0 * lam**2))
            s += term
            if term < tol:
                break
            j += 1
        return min(1.0, max(0.0, 1.0 - c * s))
    s = 0.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * lam * lam)
        s += term if j % 2 else -term
        if term < tol:
            break
        j += 1
    return min(1.0, max(0.0, 2.0 * s))


def ks_one_sample(draws: Sequence[float], cdf: Callable) -> tuple[float, float]:
    """One-sample KS statistic and asymptotic p-value against ``cdf``."""
    x = np.sort(np.asarray(draws, dtype=np.float64))
    n = x.size
    if n == 0:
        raise DomainError("KS test needs a nonempty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - f)), float(np.max(f - (i - 1) / n)))
    return d, kolmogorov_sf(math.sqrt(n) * d)


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sample KS statistic and asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise DomainError("KS test needs nonempty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    en = a.size * b.size / (a.size + b.size)
    return d, kolmogorov_sf(math.sqrt(en) * d)


def _normal_cdf(scale: float = 1.0):
    from scipy.special import ndtr

    return lambda x: ndtr(np.asarray(x) / scale)


# ---------------------------------------------------------------- configs


class KRule:
    """``k`` as a function of ``n``: ``ceil(n ** exponent)`` or a fixed value."""

    def __init__(self, exponent: Optional[float] = 0.75, fixed: Optional[int] = None):
        self.exponent = exponent
        self.fixed = fixed

    @classmethod
    def parse(cls, text: Union[str, int, float, "KRule"]) -> "KRule":
        """Accepts ``ceil(n^0.75)``, ``n^0.75``, ``n**0.6`` or an integer."""
        if isinstance(text, KRule):
            return text
        if isinstance(text, (int, np.integer)):
            return cls(exponent=None, fixed=int(text))
        s = str(text).replace(" ", "").lower()
        if s.startswith("ceil(") and s.endswith(")"):
            s = s[5:-1]
        for sep in ("n**", "n^"):
            if s.startswith(sep):
                return cls(exponent=float(s[len(sep) :]))
        try:
            return cls(exponent=None, fixed=int(s))
        except ValueError:
            raise DomainError(f"cannot parse k rule {text!r}") from None

    def __call__(self, n: int) -> int:
        if self.fixed is not None:
            return self.fixed
        return est.default_k(n, self.exponent)

    def __repr__(self) -> str:
        return f"{self.fixed}" if self.fixed is not None else f"ceil(n^{self.exponent})"


ESTIMATORS = ("t_tau_normalized", "hill", "pickands", "lo", "dr", "half_family")
TABLE2_ESTIMATORS = ("t_tau_normalized", "hill", "pickands", "lo")


@dataclass
class ExperimentConfig:
    model: models.TailModel
    n: int
    k_rule: KRule = field(default_factory=KRule)
    taus: Sequence[float] = (0.5,)
    estimators: Sequence[str] = TABLE2_ESTIMATORS
    replications: int = 500
    master_seed: int = 0
    half_family_a: float = 0.5
    sampler: str = "upper"
    n_jobs: int = 1
    outputs: Sequence[str] = ()

    def __post_init__(self):
        self.k_rule = KRule.parse(self.k_rule)
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        k = self.k_rule(self.n)
        if not 1 <= k <= self.n - 1:
            raise DomainError(f"k_rule gives k={k}, outside [1, n-1] for n={self.n}")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise DomainError(f"unknown estimators: {sorted(unknown)}")
        if self.sampler not in ("upper", "full"):
            raise DomainError(f"sampler must be 'upper' or 'full', got {self.sampler!r}")


# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class Aggregate:
    mean: float
    bias: float
    mse: float
    variance: float
    included: int
    excluded: int


@dataclass(frozen=True)
class TestRecord:
    name: str
    statistic: float
    p_value: float
    size: int
    detail: str = ""
    values: Optional[np.ndarray] = field(default=None, compare=False, repr=False)


@dataclass
class ExperimentResult:
    """Per-replication records plus aggregates.

    ``records`` rows are ``(replication, seed, estimator, value, error)``,
    with ``value`` None when the estimator failed on that replication.
    """

    gamma: float
    replications: int
    records: list[tuple[int, int, str, Optional[float], str]]
    aggregates: dict[str, Aggregate] = field(default_factory=dict)
    tests: dict[str, TestRecord] = field(default_factory=dict)

    def values(self, name: str) -> np.ndarray:
        return np.array([r[3] for r in self.records if r[2] == name and r[3] is not None])

    def excluded_fraction(self) -> float:
        if not self.aggregates:
            return 0.0
        return max(a.excluded / self.replications for a in self.aggregates.values())


def aggregate(values: np.ndarray, gamma: float, replications: int) -> Aggregate:
    """Mean, bias, MSE and variance (ddof=1) of the included values."""
    n = values.size
    if n == 0:
        nan = float("nan")
        return Aggregate(nan, nan, nan, nan, 0, replications)
    mean = float(np.mean(values))
    variance = float(np.var(values, ddof=1)) if n > 1 else 0.0
    mse = float(np.mean((values - gamma) ** 2))
    return Aggregate(mean, mean - gamma, mse, variance, n, replications - n)


def replication_seed(master_seed: int, index: int) -> int:
    """Stable 64-bit seed for replication ``index`` of a campaign."""
    ss = np.random.SeedSequence(int(master_seed) & ((1 << 64) - 1), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _map(fn, items, n_jobs: int):
    if n_jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def _draw(model, n: int, m: int, seed: int, sampler: str) -> est.Sample:
    if sampler == "full":
        return models.sample(model, n, seed)
    return models.sample_upper(model, n, m, seed)


def _evaluate(name: str, sample: est.Sample, k: int, tau: float, a: float) -> float:
    if name == "t_tau_normalized":
        return est.t_tau(sample, tau, k) / normalizers(k, tau).a_n
    if name == "hill":
        return est.hill(sample, k)
    if name == "pickands":
        return est.pickands(sample, k)
    if name == "lo":
        return est.lo(sample, k)
    if name == "dr":
        return est.dehaan_resnick(sample, k)
    if name == "half_family":
        return est.half_family(sample, k, a)
    raise DomainError(f"unknown estimator {name!r}")


def _estimator_labels(config: ExperimentConfig) -> list[tuple[str, str, float]]:
    out = []
    for name in config.estimators:
        if name == "t_tau_normalized":
            for tau in config.taus:
                out.append((f"t_tau_normalized({tau!r})", name, float(tau)))
        elif name == "half_family":
            out.append((f"half_family({config.half_family_a!r})", name, 0.5))
        else:
            out.append((name, name, 0.5))
    return out


def run_table2(config: ExperimentConfig) -> ExperimentResult:
    """Estimator comparison campaign: every estimator on every replication at ``k_rule(n)``.

    Per-replication estimator failures (e.g. degenerate Pickands spacings) are
    kept as records with an error message and excluded from the aggregates.
    """
    k = config.k_rule(config.n)
    labels = _estimator_labels(config)
    m = min(config.n, 4 * k + 1)

    def one(r: int):
        seed = replication_seed(config.master_seed, r)
        sample = _draw(config.model, config.n, m, seed, config.sampler)
        rows = []
        for label, name, tau in labels:
            try:
                value = _evaluate(name, sample, k, tau, config.half_family_a)
                rows.append((r, seed, label, value, ""))
            except GenHillError as exc:
                rows.append((r, seed, label, None, f"{type(exc).__name__}: {exc}"))
        return rows

    records = [row for rows in _map(one, range(config.replications), config.n_jobs) for row in rows]
    records.sort(key=lambda row: row[0])
    result = ExperimentResult(gamma=config.model.gamma, replications=config.replications, records=records)
    for label, _, _ in labels:
        result.aggregates[label] = aggregate(result.values(label), config.model.gamma, config.replications)
    return result


# ---------------------------------------------------------------- limit-law edf grid


@dataclass
class Table1Result:
    eval_points: list[float]
    rows: dict[str, list[float]]
    B: int
    N: int
    seed: int

    def value(self, label: str, u: float) -> float:
        return self.rows[label][self.eval_points.index(u)]

    def csv_rows(self) -> list[list]:
        out = [["tau"] + [f"F({format_float(u)})" for u in self.eval_points]]
        for label, vals in self.rows.items():
            out.append([label] + [format_float(v) for v in vals])
        return out


TABLE1_TAUS = (0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.48)


def run_table1(
    taus: Sequence[float] = TABLE1_TAUS,
    B: int = 10_000,
    N: int = 10_000,
    eval_points: Sequence[float] = (-1.96, 0.0, 1.96),
    seed: int = 0,
    mixture: bool = True,
) -> Table1Result:
    """Empirical df of ``L(tau, N)`` at the evaluation points, per ``tau`` and for the mixture."""
    samples = limitlaw.sample_limit_law_many(taus, B, seed, N) if taus else []
    if mixture:
        samples.append(limitlaw.sample_limit_law_mixture(B, seed, N))
    pts = [float(u) for u in eval_points]
    rows = {s.label: [s.cdf(u) for u in pts] for s in samples}
    return Table1Result(eval_points=pts, rows=rows, B=B, N=N, seed=seed)


# ---------------------------------------------------------------- distributional checks


def _statistics(model, n, k, R, seed, sampler, fn) -> np.ndarray:
    def one(r):
        s = _draw(model, n, k + 1, replication_seed(seed, r), sampler)
        return fn(s)

    return np.array([one(r) for r in range(R)])


def run_normality_check(
    model: models.TailModel,
    n: int,
    k_rule="ceil(n^0.6)",
    R: int = 1000,
    seed: int = 0,
    sampler: str = "upper",
) -> TestRecord:
    """KS test of ``studentize(., 1/2, k, gamma)`` replications against ``N(0, gamma^2)``."""
    if not model.gamma > 0:
        raise DomainError("normality check needs a Frechet-domain model (gamma > 0)")
    if R < 10:
        raise DomainError(f"need at least 10 replications, got {R}")
    k = KRule.parse(k_rule)(n)
    g = model.gamma
    stats = _statistics(model, n, k, R, seed, sampler, lambda s: est.studentize(s, 0.5, k, g))
    d, p = ks_one_sample(stats, _normal_cdf(g))
    return TestRecord("normality_tau_0.5", d, p, R, f"n={n} k={k} gamma={g}", stats)


def run_limit_agreement(
    model: models.TailModel,
    tau: float,
    n: int,
    k_rule="ceil(n^0.6)",
    R: int = 10_000,
    N: int = limitlaw.DEFAULT_N,
    seed: int = 0,
    sampler: str = "upper",
) -> TestRecord:
    """Two-sample KS between ``studentize(., tau, k, gamma) / gamma`` and ``L(tau, N)`` draws."""
    if tau == 0.5:
        raise DomainError("tau = 1/2 has a Gaussian limit; use run_normality_check")
    if not 0 < tau < 0.5:
        raise DomainError(f"tau must lie in (0, 1/2), got {tau}")
    if not model.gamma > 0:
        raise DomainError("limit agreement needs a Frechet-domain model (gamma > 0)")
    k = KRule.parse(k_rule)(n)
    g = model.gamma
    stats = _statistics(model, n, k, R, seed, sampler, lambda s: est.studentize(s, tau, k, g) / g)
    law = limitlaw.sample_limit_law(limitlaw.LimitLawSpec(tau, N), R, seed)
    d, p = ks_two_sample(stats, law.draws)
    return TestRecord(f"limit_agreement_tau_{tau!r}", d, p, R, f"n={n} k={k} gamma={g} N={N}", stats)


def gumbel_statistic(sample: est.Sample, model: models.TailModel, tau: float, n: int, k: int) -> float:
    """``(s(k/n) sigma_n)^{-1} (T_n(tau) - a_n s(k/n))`` for a Gumbel-domain model."""
    nc = normalizers(k, tau)
    s = float(model.s_fn(k / n))
    return (est.t_tau(sample, tau, k) - nc.a_n * s) / (s * nc.sigma_n)


def run_gumbel_check(
    model: models.TailModel,
    n: int,
    tau: float = 0.5,
    k_rule="ceil(n^0.6)",
    R: int = 1000,
    seed: int = 0,
    N: int = limitlaw.DEFAULT_N,
    sampler: str = "upper",
) -> TestRecord:
    """Gumbel-domain centering check: KS against ``N(0,1)`` (``tau = 1/2``) or ``L(tau)``."""
    if model.s_fn is None:
        raise DomainError("model has no auxiliary function s(u)")
    k = KRule.parse(k_rule)(n)
    stats = _statistics(model, n, k, R, seed, sampler, lambda s: gumbel_statistic(s, model, tau, n, k))
    if tau == 0.5:
        d, p = ks_one_sample(stats, _normal_cdf())
    else:
        law = limitlaw.sample_limit_law(limitlaw.LimitLawSpec(tau, N), R, seed)
        d, p = ks_two_sample(stats, law.draws)
    return TestRecord(
        f"gumbel_branch_tau_{tau!r}",
        d,
        p,
        R,
        f"n={n} k={k} mean={np.mean(stats):.4g} sd={np.std(stats):.4g}",
        stats,
    )


# ---------------------------------------------------------------- output


def format_float(x) -> str:
    """Shortest round-trip decimal; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Union[str, Path, io.TextIOBase, None], header: Sequence[str], rows) -> str:
    """Write rows as comma-separated LF-terminated CSV; returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, (float, int, np.floating, np.integer)) or v is None else v for v in row])
    text = buf.getvalue()
    if path is None:
        return text
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text, newline="")
    return text


def result_tables(result: ExperimentResult) -> dict[str, tuple[list[str], list]]:
    """CSV-ready tables of records, aggregates and tests."""
    records = [list(r) for r in result.records]
    aggs = [
        [name, a.mean, a.bias, a.mse, a.variance, a.included, a.excluded]
        for name, a in result.aggregates.items()
    ]
    tests = [[t.name, t.statistic, t.p_value, t.size, t.detail] for t in result.tests.values()]
    return {
        "records": (["replication", "seed", "estimator", "value", "error"], records),
        "aggregates": (["estimator", "mean", "bias", "mse", "variance", "included", "excluded"], aggs),
        "tests": (["test", "statistic", "p_value", "size", "detail"], tests),
    }
