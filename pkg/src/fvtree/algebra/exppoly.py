"""Exponential polynomials ``Σ c·t^d·e^{-μt}`` with rational-function data."""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Dict, Iterable, Mapping, Tuple

import mpmath

from .ratfunc import RationalFunction, as_rf

Key = Tuple[int, RationalFunction]


class CoincidentRateError(ArithmeticError):
    """A forcing rate coincides symbolically with the rate of the equation it drives."""


class ExpPolynomial:
    """Immutable map ``(tdeg, rate) -> coef`` read as ``Σ coef·t^tdeg·e^{-rate·t}``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[Tuple[object, int, object]] = ()):
        acc: Dict[Key, RationalFunction] = {}
        for coef, tdeg, rate in terms:
            if tdeg < 0:
                raise ValueError("negative power of t")
            _accumulate(acc, (int(tdeg), as_rf(rate)), as_rf(coef))
        self._terms = acc

    @classmethod
    def _raw(cls, terms: Dict[Key, RationalFunction]) -> "ExpPolynomial":
        e = cls.__new__(cls)
        e._terms = terms
        return e

    @classmethod
    def constant(cls, c) -> "ExpPolynomial":
        return cls([(c, 0, 0)])

    @classmethod
    def exponential(cls, rate, coef=1) -> "ExpPolynomial":
        return cls([(coef, 0, rate)])

    @property
    def terms(self) -> Dict[Key, RationalFunction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def rates(self) -> set:
        return {r for (_, r) in self._terms}

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self):
        return len(self._terms)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, ExpPolynomial):
            other = ExpPolynomial.constant(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            _accumulate(acc, k, c)
        return ExpPolynomial._raw(acc)

    __radd__ = __add__

    def __neg__(self):
        return ExpPolynomial._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ExpPolynomial):
            other = ExpPolynomial.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor) -> "ExpPolynomial":
        factor = as_rf(factor)
        if factor.is_zero():
            return ExpPolynomial()
        return ExpPolynomial._raw({k: c * factor for k, c in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, ExpPolynomial):
            return self.scale(other)
        acc: Dict[Key, RationalFunction] = {}
        for (d1, r1), c1 in self._terms.items():
            for (d2, r2), c2 in other._terms.items():
                _accumulate(acc, (d1 + d2, r1 + r2), c1 * c2)
        return ExpPolynomial._raw(acc)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ExpPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    # -- calculus -----------------------------------------------------------

    def derivative(self) -> "ExpPolynomial":
        acc: Dict[Key, RationalFunction] = {}
        for (d, r), c in self._terms.items():
            if d:
                _accumulate(acc, (d - 1, r), c * d)
            if not r.is_zero():
                _accumulate(acc, (d, r), -(c * r))
        return ExpPolynomial._raw(acc)

    def convolve(self, mu, allow_coincident: bool = True) -> "ExpPolynomial":
        """Return ``t ↦ ∫₀ᵗ e^{-μ(t-s)} f(s) ds``.

        With ``allow_coincident=False`` a term whose rate equals ``μ`` while
        ``μ`` is symbolic raises :class:`CoincidentRateError`.
        """
        mu = as_rf(mu)
        acc: Dict[Key, RationalFunction] = {}
        for (d, nu), c in self._terms.items():
            delta = nu - mu
            if delta.is_zero():
                if not allow_coincident and not mu.is_constant():
                    raise CoincidentRateError(f"rate {mu} drives itself")
                _accumulate(acc, (d + 1, mu), c / (d + 1))
                continue
            # ∫₀ᵗ e^{-μ(t-s)} s^d e^{-νs} ds
            #   = d!/δ^{d+1} e^{-μt} - Σ_j d!/(j! δ^{d+1-j}) t^j e^{-νt}
            inv = RationalFunction(1) / delta
            powers = [RationalFunction(1)]
            for _ in range(d + 1):
                powers.append(powers[-1] * inv)
            fd = factorial(d)
            _accumulate(acc, (0, mu), c * powers[d + 1] * fd)
            for j in range(d + 1):
                _accumulate(acc, (j, nu), -(c * powers[d + 1 - j] * Fraction(fd, factorial(j))))
        return ExpPolynomial._raw(acc)

    def integrate(self) -> "ExpPolynomial":
        """Return ``t ↦ ∫₀ᵗ f(s) ds``."""
        return self.convolve(0)

    # -- evaluation -----------------------------------------------------------

    def at_zero(self) -> RationalFunction:
        total = RationalFunction()
        for (d, _), c in self._terms.items():
            if d == 0:
                total = total + c
        return total

    def limit(self) -> RationalFunction:
        """Value as t→∞, assuming every nonzero rate is positive."""
        total = RationalFunction()
        for (d, r), c in self._terms.items():
            if r.is_zero():
                if d:
                    raise ValueError("polynomial growth in t has no finite limit")
                total = total + c
        return total

    def substitute(self, mapping) -> "ExpPolynomial":
        acc: Dict[Key, RationalFunction] = {}
        for (d, r), c in self._terms.items():
            _accumulate(acc, (d, r.substitute(mapping)), c.substitute(mapping))
        return ExpPolynomial._raw(acc)

    def bind(self, bindings: Mapping[str, Fraction]) -> "ExpPolynomial":
        """Bind symbols in coefficients and rates, merging terms whose rates collide."""
        acc: Dict[Key, RationalFunction] = {}
        for (d, r), c in self._terms.items():
            _accumulate(acc, (d, as_rf(r.evaluate(bindings))), as_rf(c.evaluate(bindings)))
        return ExpPolynomial._raw(acc)

    def value(self, t, bindings: Mapping[str, object] | None = None, dps: int = 50):
        """High-precision value at time ``t`` (an mpmath number)."""
        bindings = dict(bindings or {})
        with mpmath.workdps(dps):
            tt = mpmath.mpf(_to_mp(t))
            total = mpmath.mpf(0)
            for (d, r), c in self._terms.items():
                cv = _rf_mp(c, bindings)
                rv = _rf_mp(r, bindings)
                total += cv * tt ** d * mpmath.exp(-rv * tt)
            return +total

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (d, r), c in sorted(self._terms.items(), key=lambda kv: (str(kv[0][1]), kv[0][0])):
            piece = f"({c})"
            if d:
                piece += "*t" if d == 1 else f"*t^{d}"
            if not r.is_zero():
                piece += f"*exp(-({r})*t)"
            parts.append(piece)
        return " + ".join(parts)

    def __repr__(self):
        return f"ExpPolynomial({self})"


def _accumulate(acc: Dict[Key, RationalFunction], key: Key, c: RationalFunction) -> None:
    if c.is_zero():
        return
    v = acc.get(key)
    if v is None:
        acc[key] = c
        return
    v = v + c
    if v.is_zero():
        del acc[key]
    else:
        acc[key] = v


def _to_mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _rf_mp(r: RationalFunction, bindings):
    if r.is_constant():
        return _to_mp(r.constant_value())
    exact = {k: v for k, v in bindings.items() if isinstance(v, (int, Fraction))}
    if len(exact) == len(bindings):
        v = r.evaluate(exact)
        if isinstance(v, Fraction):
            return _to_mp(v)
    # fall back to evaluating numerator and denominator in mpmath
    from .polynomial import symbol_index

    vals = {symbol_index(k): _to_mp(v) for k, v in bindings.items()}

    def ev(p):
        total = mpmath.mpf(0)
        for e, c in p.items():
            term = _to_mp(c)
            for i, dd in enumerate(e):
                if dd:
                    term *= vals[i] ** dd
            total += term
        return total

    return ev(r.num) / ev(r.den)
