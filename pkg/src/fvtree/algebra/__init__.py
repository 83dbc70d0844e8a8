"""Exact arithmetic: rationals, polynomials, rational functions, exponential polynomials."""

from fractions import Fraction

from .exppoly import CoincidentRateError, ExpPolynomial
from .polynomial import SYMBOLS, MultiPolynomial, poly_gcd, symbols
from .ratfunc import PoleError, RationalFunction, as_rf, rf_symbols

_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def rf_arith(a, b, op: str) -> RationalFunction:
    try:
        f = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return f(as_rf(a), as_rf(b))


def rf_eval(f, bindings) -> Fraction:
    return as_rf(f)(**bindings)


def ep_integrate(f: ExpPolynomial) -> ExpPolynomial:
    return f.integrate()


__all__ = [
    "SYMBOLS",
    "CoincidentRateError",
    "ExpPolynomial",
    "Fraction",
    "MultiPolynomial",
    "PoleError",
    "RationalFunction",
    "as_rf",
    "ep_integrate",
    "poly_gcd",
    "rf_arith",
    "rf_eval",
    "rf_symbols",
    "symbols",
]
