"""Estimators and pass/fail records for the Monte Carlo checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np

Z_BAND = 3.0
MIN_PATHS = 100


@dataclass
class CheckResult:
    """Outcome of one check.

    The default rule passes when ``|estimate - target| ≤ max(tolerance,
    3·standard_error)``; checks with another rule (one-sided bounds,
    relative bands) set ``rule`` and compute ``passed`` themselves.
    """

    name: str
    estimate: float
    target: float
    tolerance: float
    standard_error: float
    passed: bool
    n_samples: int
    seed: Optional[int] = None
    rule: str = "abs<=max(tol,3se)"
    details: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def within(cls, name, estimate, target, tolerance=0.0, standard_error=0.0, n_samples=0, seed=None, **details):
        band = max(float(tolerance), Z_BAND * float(standard_error))
        ok = bool(abs(float(estimate) - float(target)) <= band)
        return cls(name, float(estimate), float(target), float(tolerance), float(standard_error), ok, int(n_samples), seed, details=details)

    @classmethod
    def relative(cls, name, estimate, target, rel, standard_error=0.0, n_samples=0, seed=None, **details):
        ok = bool(abs(float(estimate) - float(target)) <= rel * abs(float(target)))
        return cls(name, float(estimate), float(target), rel * abs(float(target)), float(standard_error), ok, int(n_samples), seed, f"abs<={rel:g}*|target|", details)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: estimate={self.estimate:.6g} target={self.target:.6g} "
            f"tol={self.tolerance:.3g} se={self.standard_error:.3g} n={self.n_samples}"
        )

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        for k, v in list(d["details"].items()):
            if isinstance(v, np.ndarray):
                d["details"][k] = v.tolist()
            elif isinstance(v, np.generic):
                d["details"][k] = v.item()
        return d


@dataclass(frozen=True)
class Summary:
    n: int
    mean: float
    var: float
    skew: float
    kurtosis: float
    se: float
    ci: tuple

    def var_se(self) -> float:
        """Standard error of the sample variance (uses the fourth central moment)."""
        n = self.n
        m4 = (self.kurtosis + 3.0) * self.var**2
        return math.sqrt(max(m4 - (n - 3) / (n - 1) * self.var**2, 0.0) / n)


def summarize(samples: Sequence[float]) -> Summary:
    """Mean, unbiased variance, skewness, excess kurtosis and a 3σ confidence interval for the mean."""
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples")
    mean = float(x.mean())
    c = x - mean
    var = float(c @ c / (n - 1))
    m2 = float(np.mean(c * c))
    if m2 > 0:
        skew = float(np.mean(c**3) / m2**1.5)
        kurt = float(np.mean(c**4) / m2**2 - 3.0)
    else:
        skew = kurt = 0.0
    se = math.sqrt(var / n)
    return Summary(n, mean, var, skew, kurt, se, (mean - Z_BAND * se, mean + Z_BAND * se))


def ks_exp_half(values: Sequence[float]) -> float:
    """Kolmogorov distance between the sample and ``F(x) = 1 - e^{-2x}``."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    F = -np.expm1(-2.0 * np.maximum(x, 0.0))
    hi = np.arange(1, n + 1) / n - F
    lo = F - np.arange(n) / n
    return float(max(hi.max(), lo.max()))


def ks_critical(n: int, alpha: float = 0.001) -> float:
    """Asymptotic Kolmogorov critical value ``sqrt(-log(α/2)/2)/sqrt(n)``."""
    return math.sqrt(-math.log(alpha / 2.0) / 2.0) / math.sqrt(n)


@dataclass(frozen=True)
class BrownianCheck:
    variance_slope: float
    slope_se: float
    increment_corr: float
    corr_se: float
    variances: np.ndarray
    times: np.ndarray
    passed: bool


def brownian_check(
    paths: np.ndarray,
    times: Sequence[float],
    slope_tol: float = 0.15,
    corr_tol: float = 0.1,
) -> BrownianCheck:
    """Variance slope and increment correlation of replicate paths.

    ``paths[r, k]`` is replicate ``r`` at ``times[k]`` (all paths start at
    0 at time 0).  The slope is the least-squares fit of ``Var[X(t)] = c t``
    through the origin; the correlation pools lag-1 pairs of consecutive
    grid increments.  Passes when ``|slope - 1| ≤ slope_tol`` and
    ``|corr| < corr_tol``.
    """
    X = np.asarray(paths, dtype=float)
    t = np.asarray(times, dtype=float)
    if X.ndim != 2 or X.shape[1] != t.size:
        raise ValueError("paths must be (replicates, len(times))")
    if X.shape[0] < MIN_PATHS:
        raise ValueError(f"need at least {MIN_PATHS} paths, got {X.shape[0]}")
    if t.size < 3:
        raise ValueError("need at least three grid times")
    v = X.var(axis=0, ddof=1)
    slope = float(t @ v / (t @ t))
    # replicate-level delta-method error of the slope
    c = (X - X.mean(axis=0)) ** 2
    per_rep = c @ t / (t @ t)
    slope_se = float(per_rep.std(ddof=1) / math.sqrt(X.shape[0]))
    inc = np.diff(np.concatenate([np.zeros((X.shape[0], 1)), X], axis=1), axis=1)
    a, b = inc[:, :-1].ravel(), inc[:, 1:].ravel()
    corr = float(np.corrcoef(a, b)[0, 1])
    corr_se = (1.0 - corr * corr) / math.sqrt(a.size - 1)
    ok = abs(slope - 1.0) <= slope_tol and abs(corr) < corr_tol
    return BrownianCheck(slope, slope_se, corr, corr_se, v, t, bool(ok))


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def batch_means_se(series: Sequence[float], batches: int = 20) -> float:
    """Standard error of a time average from non-overlapping batch means."""
    x = np.asarray(series, dtype=float)
    m = x.size // batches
    if m < 1:
        raise ValueError("series shorter than the number of batches")
    means = x[: m * batches].reshape(batches, m).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))
