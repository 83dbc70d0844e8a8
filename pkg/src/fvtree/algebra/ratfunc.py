"""Normalized rational functions over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Union

from .polynomial import ONE, MultiPolynomial, Scalar, canonical_symbol, poly_gcd, symbol_index


class PoleError(ZeroDivisionError):
    """Raised when a rational function is evaluated at a zero of its denominator."""


class RationalFunction:
    """Exact quotient ``num/den`` of polynomials in canonical form.

    The canonical form has ``gcd(num, den) = 1``, integer coefficients with
    no common integer factor across numerator and denominator, and a
    denominator whose leading coefficient is positive.  Two equal functions
    therefore have identical ``num`` and ``den``.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Union[MultiPolynomial, Scalar] = 0, den: Union[MultiPolynomial, Scalar] = 1):
        num = num if isinstance(num, MultiPolynomial) else MultiPolynomial.constant(num)
        den = den if isinstance(den, MultiPolynomial) else MultiPolynomial.constant(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        self.num, self.den = _canonical(num, den)
        self._hash = None

    @classmethod
    def _raw(cls, num: MultiPolynomial, den: MultiPolynomial) -> "RationalFunction":
        r = cls.__new__(cls)
        r.num, r.den, r._hash = num, den, None
        return r

    @classmethod
    def symbol(cls, name: str) -> "RationalFunction":
        return cls._raw(MultiPolynomial.symbol(name), ONE)

    @classmethod
    def coerce(cls, x) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, MultiPolynomial):
            return cls(x)
        if isinstance(x, (int, Fraction)):
            x = Fraction(x)
            return cls._raw(MultiPolynomial.constant(x.numerator), MultiPolynomial.constant(x.denominator))
        raise TypeError(f"cannot convert {type(x).__name__} to RationalFunction")

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("rational function is not constant")
        return self.num.constant_value() / self.den.constant_value()

    def variables(self) -> frozenset:
        return self.num.variables() | self.den.variables()

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        if other.den.is_constant() and self.den.is_constant():
            return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)
        g = poly_gcd(self.den, other.den)
        if g.is_constant():
            return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)
        d1, d2 = self.den.exquo(g), other.den.exquo(g)
        return RationalFunction(self.num * d2 + other.num * d1, self.den * d2)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._raw(-self.num, self.den)

    def __sub__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return RationalFunction()
        # cross-cancel first so the final gcd works on smaller inputs
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        n1, d2 = self.num.exquo(g1), other.den.exquo(g1)
        n2, d1 = other.num.exquo(g2), self.den.exquo(g2)
        return RationalFunction._from_coprime(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return self * RationalFunction._raw_inverse(other)

    def __rtruediv__(self, other):
        return RationalFunction.coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise ValueError("only integer powers")
        if k < 0:
            return RationalFunction(1) / self ** (-k)
        return RationalFunction._raw(self.num ** k, self.den ** k) if k else RationalFunction(1)

    @staticmethod
    def _raw_inverse(r: "RationalFunction") -> "RationalFunction":
        return RationalFunction._from_coprime(r.den, r.num)

    @classmethod
    def _from_coprime(cls, num: MultiPolynomial, den: MultiPolynomial) -> "RationalFunction":
        r = cls.__new__(cls)
        r.num, r.den = _scale(num, den)
        r._hash = None
        return r

    def __eq__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, bindings: Mapping[str, Scalar]) -> Union["RationalFunction", Fraction]:
        """Bind some symbols; returns a Fraction when nothing remains symbolic."""
        n = self.num.evaluate(bindings)
        d = self.den.evaluate(bindings)
        if d.is_zero():
            raise PoleError(f"pole of {self} at {dict(bindings)}")
        r = RationalFunction(n, d)
        return r.constant_value() if r.is_constant() else r

    def __call__(self, **bindings) -> Fraction:
        unbound = {canonical_symbol(s) for s in self._symbol_names()} - {canonical_symbol(k) for k in bindings}
        if unbound:
            raise KeyError(f"unbound symbols: {', '.join(sorted(unbound))}")
        v = self.evaluate(bindings)
        assert isinstance(v, Fraction)
        return v

    def _symbol_names(self):
        from .polynomial import SYMBOLS

        return [SYMBOLS[i] for i in self.variables()]

    def float_value(self, bindings: Mapping[str, float]) -> float:
        return self.num.float_value(bindings) / self.den.float_value(bindings)

    def substitute(self, mapping: Mapping[str, Union["RationalFunction", MultiPolynomial, Scalar]]) -> "RationalFunction":
        """Simultaneously replace symbols by rational functions."""
        repl = {symbol_index(k): RationalFunction.coerce(v) for k, v in mapping.items()}
        return _subst_poly(self.num, repl) / _subst_poly(self.den, repl)

    # -- rendering --------------------------------------------------------------

    def __str__(self) -> str:
        num = str(self.num)
        if self.den == ONE:
            return num
        den = str(self.den)
        if len(self.num) > 1:
            num = f"({num})"
        if len(self.den) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


def _scale(num: MultiPolynomial, den: MultiPolynomial):
    if num.is_zero():
        return num, ONE
    cn, pn = num.primitive()
    cd, pd = den.primitive()
    c = cn / cd
    return pn * c.numerator, pd * c.denominator


def _canonical(num: MultiPolynomial, den: MultiPolynomial):
    if num.is_zero():
        return num, ONE
    if not den.is_constant():
        g = poly_gcd(num, den)
        if not g.is_constant():
            num, den = num.exquo(g), den.exquo(g)
    return _scale(num, den)


def _subst_poly(p: MultiPolynomial, repl) -> RationalFunction:
    total = RationalFunction()
    # group by substituted part to limit rational-function additions
    groups = {}
    for e, c in p.items():
        key = tuple(e[i] for i in sorted(repl))
        rest = tuple(0 if i in repl else d for i, d in enumerate(e))
        groups.setdefault(key, {})[rest] = c
    order = sorted(repl)
    for key, rest in groups.items():
        factor = RationalFunction(MultiPolynomial(rest))
        for i, d in zip(order, key):
            if d:
                factor = factor * repl[i] ** d
        total = total + factor
    return total


def as_rf(x) -> RationalFunction:
    return RationalFunction.coerce(x)


def rf_symbols(*names: str):
    return tuple(RationalFunction.symbol(n) for n in names)
