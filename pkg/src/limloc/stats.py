"""Monte Carlo summaries and the statistical tests used to judge them."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats as _st

from .errors import ParameterError

#: Samples smaller than this give an "inconclusive" verdict instead of pass/fail.
MIN_SAMPLES = 100

VERDICTS = ("pass", "fail", "inconclusive")


@dataclass(frozen=True)
class MCReport:
    label: str
    estimate: float
    stderr: float
    n: int
    seed_root: int
    verdict: str = "inconclusive"
    threshold: str = ""

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    n: int
    p_value: float
    reference: str

    def to_dict(self):
        return asdict(self)


def verdict(ok: bool, n: int) -> str:
    if n < MIN_SAMPLES:
        return "inconclusive"
    return "pass" if ok else "fail"


def mean_report(sample, label: str, seed_root: int = 0) -> MCReport:
    x = np.asarray(sample, dtype=float)
    if x.size < 2:
        raise ParameterError("need at least two samples")
    return MCReport(label, float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)), int(x.size), int(seed_root))


def proportion_report(successes: int, trials: int, label: str, seed_root: int = 0) -> MCReport:
    if trials < 1:
        raise ParameterError("need at least one trial")
    p = successes / trials
    return MCReport(label, p, math.sqrt(max(p * (1 - p), 0.0) / trials), int(trials), int(seed_root))


def judge_close(report: MCReport, target: float, k: float = 3.0) -> MCReport:
    """Pass when ``|estimate - target| <= k * stderr``."""
    ok = abs(report.estimate - target) <= k * report.stderr
    thr = f"|estimate - {target:.6g}| <= {k:g} * stderr"
    return MCReport(report.label, report.estimate, report.stderr, report.n, report.seed_root,
                    verdict(ok, report.n), thr)


def kolmogorov_sf(x: float, tol: float = 1e-10) -> float:
    """Asymptotic Kolmogorov survival function ``2 sum (-1)^{k-1} exp(-2 k^2 x^2)``."""
    if x <= 0:
        return 1.0
    if x < 0.6:
        # Jacobi theta form of the CDF; the alternating series cancels badly here.
        c = math.pi**2 / (8.0 * x * x)
        cdf = math.sqrt(2.0 * math.pi) / x * sum(math.exp(-(2 * k - 1) ** 2 * c) for k in range(1, 6))
        return 1.0 - cdf
    total, k = 0.0, 1
    while True:
        term = 2.0 * math.exp(-2.0 * k * k * x * x)
        total += term if k % 2 else -term
        if term < tol:
            break
        k += 1
    return min(1.0, max(0.0, total))


def ks_test(sample, cdf, reference: str = "") -> KSResult:
    """One-sample Kolmogorov-Smirnov test against a continuous ``cdf``.

    The p-value uses the asymptotic Kolmogorov distribution of ``sqrt(n) D``.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n < 1 or not np.all(np.isfinite(x)):
        raise ParameterError("sample must be non-empty and finite")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    return KSResult(d, n, kolmogorov_sf(math.sqrt(n) * d), reference)


def ks_two_sample(a, b, reference: str = "two-sample") -> KSResult:
    r = _st.ks_2samp(np.asarray(a, float), np.asarray(b, float))
    return KSResult(float(r.statistic), int(min(len(a), len(b))), float(r.pvalue), reference)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    slope_stderr: float
    intercept: float
    residuals: np.ndarray


def fit_exponent(ts, estimates, stderrs) -> ExponentFit:
    """Weighted least squares of ``log estimate`` on ``log t``.

    Each point is weighted by the inverse variance of its log, ``(est/stderr)^2``.
    The slope standard error comes from those weights, not from the residuals.
    """
    t = np.asarray(ts, float)
    y = np.asarray(estimates, float)
    s = np.asarray(stderrs, float)
    if not (t.size == y.size == s.size) or t.size < 3:
        raise ParameterError("need at least three points with matching lengths")
    if np.any(t <= 0) or np.any(y <= 0) or np.any(s <= 0):
        raise ParameterError("times, estimates and stderrs must be positive")
    X = np.column_stack([np.ones_like(t), np.log(t)])
    ly = np.log(y)
    w = (y / s) ** 2
    cov = np.linalg.inv(X.T @ (w[:, None] * X))
    beta = cov @ (X.T @ (w * ly))
    return ExponentFit(float(beta[1]), float(math.sqrt(cov[1, 1])), float(beta[0]), ly - X @ beta)


@dataclass(frozen=True)
class DominanceResult:
    mean_a: float
    mean_b: float
    stderr: float
    verdict: str
    direction: str


def dominance_test(sample_a, sample_b, direction: str = "le", k: float = 3.0) -> DominanceResult:
    """Is ``mean(a) <= mean(b)`` (``le``) or ``>=`` (``ge``), up to ``k`` pooled stderrs?

    Fails only when the data contradict the claimed order by more than the margin.
    """
    a = np.asarray(sample_a, float)
    b = np.asarray(sample_b, float)
    if direction not in ("le", "ge"):
        raise ParameterError("direction must be 'le' or 'ge'")
    if a.size < 2 or b.size < 2:
        raise ParameterError("need at least two samples on each side")
    se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
    diff = a.mean() - b.mean()
    ok = diff <= k * se if direction == "le" else diff >= -k * se
    return DominanceResult(float(a.mean()), float(b.mean()), se, verdict(ok, min(a.size, b.size)), direction)
