from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fvtree.algebra import (
    ExpPolynomial,
    MultiPolynomial,
    PoleError,
    RationalFunction,
    poly_gcd,
    rf_arith,
    rf_eval,
    rf_symbols,
    symbols,
)

lam, th = symbols("λ", "ϑ")
L, T = rf_symbols("λ", "ϑ")

coeffs = st.integers(-4, 4)


@st.composite
def polys(draw, max_terms=4):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        a, b = draw(st.integers(0, 3)), draw(st.integers(0, 2))
        c = draw(coeffs)
        terms[(a, b)] = terms.get((a, b), 0) + c
    p = MultiPolynomial.constant(0)
    for (a, b), c in terms.items():
        p = p + c * lam**a * th**b
    return p


nonzero_polys = polys().filter(lambda p: not p.is_zero())


def test_gcd_of_known_factors():
    f = (lam + 1) * (2 * lam + th + 3)
    g = (lam + 1) * (lam - th)
    assert poly_gcd(f, g) == lam + 1
    assert poly_gcd(f * f, f * (lam - 2)) == poly_gcd(f, f)


def test_gcd_is_normalized():
    g = poly_gcd(6 * lam + 6, -4 * lam - 4)
    assert g == lam + 1


def test_rational_function_cancels():
    r = RationalFunction((lam + 1) * (lam + 2), (lam + 1) * (lam + 3))
    assert r == RationalFunction(lam + 2, lam + 3)
    assert r.den == lam + 3


def test_canonical_sign_and_content():
    r = RationalFunction(2 * lam, -4 * lam - 4)
    assert r.num == -lam and r.den == 2 * lam + 2


def test_evaluate_exact():
    r = RationalFunction(MultiPolynomial.constant(1), lam + 1)
    assert r(λ=Fraction(1, 3)) == Fraction(3, 4)
    assert rf_eval(r, {"lambda": 2}) == Fraction(1, 3)


def test_pole_raises():
    r = RationalFunction(MultiPolynomial.constant(1), lam - 1)
    with pytest.raises(PoleError):
        r.evaluate({"λ": 1})


def test_rf_arith_ops():
    assert rf_arith(L, 1, "add") == L + 1
    assert rf_arith(L, L, "div") == RationalFunction(1)
    with pytest.raises(ValueError):
        rf_arith(L, L, "pow")


def test_substitute():
    r = 1 / (L + 1)
    assert r.substitute({"λ": 2 * L}) == 1 / (2 * L + 1)


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_ring_laws(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert (a - a).is_zero()


@settings(max_examples=40, deadline=None)
@given(nonzero_polys, nonzero_polys, nonzero_polys)
def test_gcd_divides_and_is_maximal(a, b, c):
    g = poly_gcd(a * c, b * c)
    (a * c).exquo(g)
    (b * c).exquo(g)
    # c divides the gcd up to a constant
    g.exquo(poly_gcd(c, c))


@settings(max_examples=40, deadline=None)
@given(polys(), nonzero_polys, polys(), nonzero_polys)
def test_field_arithmetic_is_canonical(a, b, c, d):
    x, y = RationalFunction(a, b), RationalFunction(c, d)
    s = x + y
    assert s - y == x
    assert hash(s) == hash(RationalFunction(s.num, s.den))
    if not y.is_zero():
        assert (x * y) / y == x


@settings(max_examples=40, deadline=None)
@given(polys(), nonzero_polys, st.fractions(-3, 3, max_denominator=7), st.fractions(-3, 3, max_denominator=7))
def test_evaluation_is_a_homomorphism(a, b, u, v):
    r = RationalFunction(a, b)
    bind = {"λ": u, "ϑ": v}
    dv = b.evaluate(bind)
    if dv.is_zero():
        return
    assert r.evaluate(bind) == a.evaluate(bind).constant_value() / dv.constant_value()


def test_exppoly_calculus():
    f = ExpPolynomial([(3, 0, 2), (1, 1, 0)])  # 3e^{-2t} + t
    assert f.derivative() == ExpPolynomial([(-6, 0, 2), (1, 0, 0)])
    F = f.integrate()
    assert F.derivative() == f
    assert F.at_zero().is_zero()
    assert abs(float(F.value(Fraction(1))) - (1.5 * (1 - 2.718281828459045**-2) + 0.5)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2), st.integers(1, 5))
def test_convolution_solves_linear_ode(rate, deg, mu):
    # g = ∫₀ᵗ e^{-μ(t-s)} f(s) ds satisfies g' = f - μ g and g(0) = 0
    f = ExpPolynomial([(1, deg, rate)])
    g = f.convolve(mu)
    assert g.derivative() == f - g.scale(mu)
    assert g.at_zero().is_zero()


def test_symbolic_coincident_rate():
    f = ExpPolynomial.exponential(L + 1)
    g = f.convolve(L + 1)
    assert g == ExpPolynomial([(1, 1, L + 1)])
