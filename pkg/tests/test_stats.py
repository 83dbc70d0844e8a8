import math

import numpy as np
import pytest
from scipy import stats as sps

from fvtree.stats import (
    CheckResult,
    batch_means_se,
    brownian_check,
    ks_critical,
    ks_exp_half,
    loglog_slope,
    summarize,
)

TIMES = np.linspace(0.1, 1.0, 10)


def test_summarize_against_scipy():
    x = np.random.default_rng(1).gamma(2.0, size=5000)
    s = summarize(x)
    assert s.mean == pytest.approx(x.mean())
    assert s.var == pytest.approx(x.var(ddof=1))
    assert s.skew == pytest.approx(sps.skew(x))
    assert s.kurtosis == pytest.approx(sps.kurtosis(x))
    assert s.ci[0] < s.mean < s.ci[1]
    with pytest.raises(ValueError):
        summarize([1.0])


def test_variance_standard_error_normal():
    x = np.random.default_rng(2).normal(size=20000)
    s = summarize(x)
    assert s.var_se() == pytest.approx(math.sqrt(2 / x.size), rel=0.05)


def test_ks_matches_scipy():
    x = np.random.default_rng(3).exponential(0.5, size=3000)
    assert ks_exp_half(x) == pytest.approx(sps.kstest(x, "expon", args=(0, 0.5)).statistic)
    assert ks_exp_half(x) < ks_critical(x.size)
    assert ks_exp_half(np.random.default_rng(4).exponential(1.0, size=3000)) > ks_critical(3000)


def _bm(reps, sigma2=1.0, seed=5):
    dt = np.diff(np.concatenate([[0.0], TIMES]))
    inc = np.random.default_rng(seed).normal(size=(reps, TIMES.size)) * np.sqrt(sigma2 * dt)
    return np.cumsum(inc, axis=1)


def _ou(reps, kappa=10.0, seed=6):
    # X = ∫ OU dt with a fast-reverting OU has Var ~ t/κ², and the OU itself is mean reverting
    rng = np.random.default_rng(seed)
    out = np.zeros((reps, TIMES.size))
    x = rng.normal(size=reps) * math.sqrt(kappa / 2)
    prev = 0.0
    for k, t in enumerate(TIMES):
        dt = t - prev
        a = math.exp(-kappa * dt)
        x = a * x + rng.normal(size=reps) * math.sqrt(kappa / 2 * (1 - a * a))
        out[:, k] = x
        prev = t
    return out


def test_brownian_motion_passes():
    res = brownian_check(_bm(2000), TIMES)
    assert res.passed
    assert abs(res.variance_slope - 1) < 4 * res.slope_se
    assert abs(res.increment_corr) < 4 * res.corr_se


def test_scaled_brownian_motion_fails_slope():
    res = brownian_check(_bm(2000, sigma2=2.0), TIMES)
    assert not res.passed
    assert res.variance_slope == pytest.approx(2.0, rel=0.1)


def test_mean_reverting_process_fails():
    res = brownian_check(_ou(2000), TIMES)
    assert not res.passed
    assert res.increment_corr < -0.1


def test_brownian_check_validates():
    with pytest.raises(ValueError):
        brownian_check(_bm(50), TIMES)
    with pytest.raises(ValueError):
        brownian_check(_bm(200)[:, :2], TIMES[:2])


def test_check_result_rules():
    r = CheckResult.within("a", 1.05, 1.0, tolerance=0.1)
    assert r.passed and r.line().startswith("[PASS] a")
    assert not CheckResult.within("b", 1.5, 1.0, tolerance=0.1, standard_error=0.1).passed
    assert CheckResult.within("c", 1.25, 1.0, tolerance=0.1, standard_error=0.1).passed
    rel = CheckResult.relative("d", 0.5, 2.0, 0.1)
    assert not rel.passed and rel.line().startswith("[FAIL]")
    d = CheckResult.within("e", 1.0, 1.0, extra=np.arange(3)).to_dict()
    assert d["details"]["extra"] == [0, 1, 2]


def test_loglog_slope_and_batch_means():
    x = np.array([1e-3, 1e-2, 1e-1])
    assert loglog_slope(x, 5 * x**2) == pytest.approx(2.0)
    z = np.random.default_rng(7).normal(size=40000)
    assert batch_means_se(z) == pytest.approx(1 / math.sqrt(z.size), rel=0.5)
    with pytest.raises(ValueError):
        batch_means_se(z[:5])
