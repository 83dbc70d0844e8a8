import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import mpmath
import numpy as np
import pytest
from scipy.linalg import expm

from fvtree.algebra import rf_symbols
from fvtree.basis import psi
from fvtree.moments import (
    centered_moment,
    equilibrium_value,
    evolve,
    increment_moment,
    named_formula,
    normalized_power_mean,
    tavare_mean_N,
    tn_moment,
    z_moments,
)
from fvtree.reference_table import REFERENCE_TRANSITIONS

L, T, S, TT = rf_symbols("λ", "ϑ", "s", "t")
LAM, THETA = Fraction(3, 2), Fraction(1, 3)


def coalescent_expectation(g, lam, theta=Fraction(0)):
    """E[Ψ_g] from the Kingman coalescent of g's vertices, by first-step analysis.

    State: a partition of the vertices into ancestral lines.  Edges between
    different lines accumulate e^{-w·depth}; with marks every line holding an
    endpoint of a still-open edge mutates at rate ϑ, which kills the indicator.
    """
    edges = [(i, j, sum(c for _, c in w)) for i, j, w in g.edges]

    @lru_cache(maxsize=None)
    def value(blocks):
        k = len(blocks)
        where = {v: b for b, blk in enumerate(blocks) for v in blk}
        open_w = sum(w for i, j, w in edges if where[i] != where[j])
        if open_w == 0:
            return Fraction(1)
        kill = 0
        if g.marked:
            kill = theta * len({where[v] for i, j, _ in edges if where[i] != where[j] for v in (i, j)})
        merge_rate = Fraction(k * (k - 1), 2)
        total = merge_rate + lam * open_w + kill
        acc = Fraction(0)
        for a, b in combinations(range(k), 2):
            new = [blk for c, blk in enumerate(blocks) if c not in (a, b)] + [blocks[a] | blocks[b]]
            acc += value(tuple(sorted(new, key=min)))
        return acc / total

    verts = sorted({v for i, j, _ in edges for v in (i, j)})
    return value(tuple(frozenset([v]) for v in verts))


@pytest.mark.parametrize("lab", [lab for lab, _ in REFERENCE_TRANSITIONS[1:23]])
def test_equilibrium_matches_coalescent_oracle(lab):
    g = psi(lab)
    assert equilibrium_value(g).evaluate({"λ": LAM}) == coalescent_expectation(g, LAM)


@pytest.mark.parametrize("lab", ["12", "12,12", "12,23", "12,34", "12,23,34", "12,13,23", "12,34,56"])
def test_marked_equilibrium_matches_coalescent_oracle(lab):
    g = psi(lab, marked=True)
    assert equilibrium_value(g).evaluate({"λ": LAM, "ϑ": THETA}) == coalescent_expectation(g, LAM, THETA)


def test_closed_forms():
    e12 = 1 / (L + 1)
    e23 = (2 / (L + 1) + 1 / (2 * L + 1)) / (2 * L + 3)
    assert equilibrium_value(psi("12")) == e12
    assert equilibrium_value(psi("12,23")) == e23
    assert equilibrium_value(psi("12,34")) == (2 * e12 + 4 * e23) / (2 * L + 6)
    assert equilibrium_value(psi("12", marked=True)) == 1 / (L + 2 * T + 1)


def test_variance_formula():
    assert centered_moment(2) == 2 * L**2 / (4 * L**3 + 20 * L**2 + 27 * L + 9)
    assert named_formula("variance") == centered_moment(2)


def test_fourth_moment_scaling():
    # λ² E[((λ+1)Ψ-1)^4] approaches 3/4 (Gaussian with variance 1/(2λ))
    c4 = centered_moment(4)
    for lam in (10**4, 10**6):
        v = float(c4.evaluate({"λ": lam})) * lam**2
        assert abs(v - 0.75) < 30 / lam


def test_normalized_power_mean_limit():
    assert normalized_power_mean(1) == 1
    r2 = normalized_power_mean(2)
    assert abs(float(r2.evaluate({"λ": 10**8})) - 1) < 1e-7


def test_z_covariance_closed_form():
    u = S + TT
    expected = 4 * S * TT * L**3 / ((u * L + 1) * (u * L + 3) * (u * L + 6))
    assert z_moments().cov == expected


def test_z_variance_limit_is_one_half():
    cov = z_moments().cov
    v = cov.evaluate({"s": 1, "t": 1, "λ": 10**9})
    assert abs(float(v) - 0.5) < 1e-8


def test_increment_second_moment_oracle():
    # E[Ψ_t | X_0] relaxes exponentially, so E[(Ψ_t-Ψ_0)^2] = 2 Var Ψ (1 - e^{-(λ+1)t})
    lam = Fraction(2)
    f = increment_moment(2, lam)
    var = equilibrium_value(psi("12,34")).evaluate({"λ": lam}) - Fraction(1, 9)
    with mpmath.workdps(50):
        for t in (Fraction(1, 10), Fraction(1), Fraction(5)):
            v = mpmath.mpf(var.numerator) / var.denominator
            expected = 2 * v * (1 - mpmath.exp(-3 * mpmath.mpf(t.numerator) / t.denominator))
            assert abs(f.value(t) - expected) < mpmath.mpf(10) ** -40


def test_quadratic_variation_rate():
    # d/dt E[(Ψ_t-Ψ_0)^2] at 0 equals 4(E[Ψ^{12,23}] - E[Ψ^{12,34}])
    for lam in (Fraction(1, 2), Fraction(7)):
        f = increment_moment(2, lam)
        slope = f.derivative().at_zero()
        e23 = equilibrium_value(psi("12,23")).evaluate({"λ": lam})
        e34 = equilibrium_value(psi("12,34")).evaluate({"λ": lam})
        assert slope == 4 * (e23 - e34)


def test_fourth_increment_small_time():
    lam = Fraction(10)
    f2, f4 = increment_moment(2, lam), increment_moment(4, lam)
    assert f4.at_zero() == 0 and f2.at_zero() == 0
    # continuous paths: no O(t) term in the fourth moment
    assert f4.derivative().at_zero() == 0
    # m4 ~ 3 E[σ⁴] t², m2 ~ E[σ²] t, and E[σ⁴] ≥ E[σ²]²
    a4 = (f4.derivative().derivative().at_zero() / 2).constant_value()
    a2 = f2.derivative().at_zero().constant_value()
    assert a4 >= 3 * a2**2
    t = Fraction(1, 10**5)
    assert abs(f4.value(t) / f2.value(t) ** 2 - a4 / a2**2) < 1e-3 * (a4 / a2**2)


def test_evolution_starts_at_identity_and_relaxes():
    g = psi("12,34")
    ex = evolve(g)
    assert ex.at_zero() == ex.at_zero().of(g)
    stat = ex.stationary_expectation()
    assert stat.limit() == equilibrium_value(g)
    # stationarity: E[Ψ(X_t)] is constant
    assert stat.derivative().is_zero()


def tavare_oracle(eps, n):
    """Expected lines at depth ε from n leaves, by the pure-death chain."""
    Q = np.zeros((n, n))
    for k in range(2, n + 1):
        r = k * (k - 1) / 2
        Q[k - 1, k - 1] = -r
        Q[k - 1, k - 2] = r
    p = expm(Q * eps)[n - 1]
    return float(p @ np.arange(1, n + 1))


@pytest.mark.parametrize("eps,n", [(0.1, 40), (0.02, 200), (0.05, 500)])
def test_tavare_finite_population(eps, n):
    iv = tavare_mean_N(eps, n_lines=n)
    assert abs(iv.mid - tavare_oracle(eps, n)) < 1e-8 * iv.mid


def test_tavare_infinite():
    for eps in (0.1, 0.01, 0.001):
        iv = tavare_mean_N(eps)
        direct = math.fsum((2 * k - 1) * math.exp(-k * (k - 1) * eps / 2) for k in range(1, 20000))
        assert iv.lower <= direct + 1e-9 and direct - 1e-9 <= iv.upper
        assert iv.width < 1e-9
        assert abs(iv.mid - 2 / eps - 1 / 3) < 0.01


def test_tn_moments():
    assert tn_moment(5) == Fraction(2, 5)
    for n in (5, 20):
        # Σ_{i>n} 4/(i(i-1))² via partial fractions and trigamma
        with mpmath.workdps(40):
            direct = 4 * (mpmath.psi(1, n) + mpmath.psi(1, n + 1) - mpmath.mpf(2) / n)
        iv = tn_moment(n, "var")
        assert iv.lower <= direct <= iv.upper
    c4 = tn_moment(5, "central4")
    assert c4.lower <= c4.upper
    with pytest.raises(ValueError):
        tn_moment(0)
