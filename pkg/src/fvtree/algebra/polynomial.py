"""Sparse multivariate polynomials with exact rational coefficients.

Polynomials live over a fixed alphabet of five symbols.  Exponent vectors
are tuples of length five and coefficients are :class:`fractions.Fraction`.
The multivariate gcd uses content extraction plus a primitive
pseudo-remainder sequence in one main variable, recursing on the contents.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd as igcd
from typing import Dict, Iterable, Mapping, Tuple, Union

SYMBOLS: Tuple[str, ...] = ("λ", "λ'", "ϑ", "s", "t")
NVARS = len(SYMBOLS)

_ALIASES = {
    "lambda": "λ",
    "lam": "λ",
    "l": "λ",
    "lambda'": "λ'",
    "lambda2": "λ'",
    "λ′": "λ'",
    "theta": "ϑ",
    "θ": "ϑ",
}

Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction]


def symbol_index(name: str) -> int:
    """Position of a symbol (or one of its ASCII aliases) in the alphabet."""
    name = _ALIASES.get(name, name)
    try:
        return SYMBOLS.index(name)
    except ValueError:
        raise KeyError(f"unknown symbol {name!r}") from None


def canonical_symbol(name: str) -> str:
    return SYMBOLS[symbol_index(name)]


def order_key(e: Exponent) -> tuple:
    """Graded lexicographic key, λ smallest and t largest."""
    return (sum(e),) + tuple(reversed(e))


_ZERO_EXP: Exponent = (0,) * NVARS


def _unit(i: int, d: int = 1) -> Exponent:
    e = [0] * NVARS
    e[i] = d
    return tuple(e)


class MultiPolynomial:
    """Immutable sparse polynomial in the symbols of :data:`SYMBOLS`."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, Scalar] | None = None):
        clean: Dict[Exponent, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if c:
                    if len(e) != NVARS:
                        raise ValueError("exponent vector has wrong length")
                    clean[tuple(e)] = Fraction(c)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Exponent, Fraction]) -> "MultiPolynomial":
        # trusted constructor: no zero coefficients, Fraction values
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def constant(cls, c: Scalar) -> "MultiPolynomial":
        return cls._raw({_ZERO_EXP: Fraction(c)} if c else {})

    @classmethod
    def symbol(cls, name: str) -> "MultiPolynomial":
        return cls._raw({_unit(symbol_index(name)): Fraction(1)})

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> Dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and _ZERO_EXP in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms.get(_ZERO_EXP, Fraction(0))

    def variables(self) -> frozenset:
        vs = set()
        for e in self._terms:
            for i, d in enumerate(e):
                if d:
                    vs.add(i)
        return frozenset(vs)

    def degree(self, var: int | None = None) -> int:
        if not self._terms:
            return -1
        if var is None:
            return max(sum(e) for e in self._terms)
        return max(e[var] for e in self._terms)

    def leading(self) -> Tuple[Exponent, Fraction]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self._terms, key=order_key)
        return e, self._terms[e]

    # -- arithmetic -------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "MultiPolynomial":
        if isinstance(other, MultiPolynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPolynomial.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if len(other._terms) > len(self._terms):
            self, other = other, self
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return MultiPolynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPolynomial._raw({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return MultiPolynomial._raw({})
            f = Fraction(other)
            return MultiPolynomial._raw({e: c * f for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: Dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e)
                out[e] = c1 * c2 if v is None else v + c1 * c2
        return MultiPolynomial._raw({e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        result = MultiPolynomial.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPolynomial.constant(other)
        if not isinstance(other, MultiPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- evaluation -------------------------------------------------------

    def evaluate(self, bindings: Mapping[str, Scalar]) -> "MultiPolynomial":
        """Substitute rational values for some symbols."""
        vals = {symbol_index(k): Fraction(v) for k, v in bindings.items()}
        out: Dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            e2 = list(e)
            for i, v in vals.items():
                if e[i]:
                    c = c * v ** e[i]
                    e2[i] = 0
            if not c:
                continue
            key = tuple(e2)
            out[key] = out.get(key, 0) + c
        return MultiPolynomial._raw({e: c for e, c in out.items() if c})

    def __call__(self, **bindings) -> Fraction:
        p = self.evaluate(bindings)
        if not p.is_constant():
            names = sorted(SYMBOLS[i] for i in p.variables())
            raise KeyError(f"unbound symbols: {', '.join(names)}")
        return p.constant_value()

    def float_value(self, bindings: Mapping[str, float]) -> float:
        vals = [0.0] * NVARS
        for k, v in bindings.items():
            vals[symbol_index(k)] = v
        total = 0.0
        for e, c in self._terms.items():
            term = float(c)
            for i, d in enumerate(e):
                if d:
                    term *= vals[i] ** d
            total += term
        return total

    # -- structure in one variable ----------------------------------------

    def coefficients_in(self, var: int) -> Dict[int, "MultiPolynomial"]:
        parts: Dict[int, Dict[Exponent, Fraction]] = {}
        for e, c in self._terms.items():
            d = e[var]
            rest = e[:var] + (0,) + e[var + 1:]
            parts.setdefault(d, {})[rest] = c
        return {d: MultiPolynomial._raw(t) for d, t in parts.items()}

    @staticmethod
    def from_coefficients(var: int, coeffs: Mapping[int, "MultiPolynomial"]) -> "MultiPolynomial":
        out: Dict[Exponent, Fraction] = {}
        for d, p in coeffs.items():
            for e, c in p._terms.items():
                key = e[:var] + (e[var] + d,) + e[var + 1:]
                out[key] = out.get(key, 0) + c
        return MultiPolynomial._raw({e: c for e, c in out.items() if c})

    # -- division and normalization ---------------------------------------

    def exquo(self, divisor: "MultiPolynomial") -> "MultiPolynomial":
        """Exact quotient; raises ``ArithmeticError`` if the division leaves a remainder."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if divisor.is_constant():
            return self * (1 / divisor.constant_value())
        ed, cd = divisor.leading()
        rem = dict(self._terms)
        quot: Dict[Exponent, Fraction] = {}
        dterms = list(divisor._terms.items())
        while rem:
            e = max(rem, key=order_key)
            q = tuple(a - b for a, b in zip(e, ed))
            if min(q) < 0:
                raise ArithmeticError("inexact polynomial division")
            f = rem[e] / cd
            quot[q] = f
            for e2, c2 in dterms:
                k = tuple(a + b for a, b in zip(q, e2))
                v = rem.get(k, 0) - f * c2
                if v:
                    rem[k] = v
                else:
                    rem.pop(k, None)
        return MultiPolynomial._raw(quot)

    def primitive(self) -> Tuple[Fraction, "MultiPolynomial"]:
        """Split as ``content * primitive`` with integer coprime coefficients and positive leading coefficient."""
        if not self._terms:
            return Fraction(0), self
        den = reduce(lambda a, b: a * b // igcd(a, b), (c.denominator for c in self._terms.values()), 1)
        ints = {e: int(c * den) for e, c in self._terms.items()}
        g = reduce(igcd, (abs(v) for v in ints.values()), 0)
        _, lc = self.leading()
        if lc < 0:
            g = -g
        prim = MultiPolynomial._raw({e: Fraction(v // g) for e, v in ints.items()})
        return Fraction(g, den), prim

    # -- rendering --------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for e in sorted(self._terms, key=order_key, reverse=True):
            c = self._terms[e]
            mono = "*".join(
                (SYMBOLS[i] if d == 1 else f"{SYMBOLS[i]}^{d}")
                for i, d in enumerate(e)
                if d
            )
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            pieces.append(("-" if c < 0 else "+", body))
        sign, body = pieces[0]
        text = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            text += sign + body
        return text

    def __repr__(self) -> str:
        return f"MultiPolynomial({self})"


ZERO = MultiPolynomial.constant(0)
ONE = MultiPolynomial.constant(1)


# ---------------------------------------------------------------------------
# gcd


def _int_content(coeffs: Iterable[int]) -> int:
    return reduce(igcd, (abs(c) for c in coeffs), 0)


def _uni_to_ints(p: MultiPolynomial, var: int) -> list:
    """Dense integer coefficient list (index = degree) of a univariate polynomial."""
    _, prim = p.primitive()
    coeffs = [0] * (p.degree(var) + 1)
    for e, c in prim.items():
        coeffs[e[var]] = int(c)
    return coeffs


def _uni_prem(f: list, g: list) -> list:
    f = list(f)
    lg = g[-1]
    dg = len(g) - 1
    while len(f) - 1 >= dg and any(f):
        lf = f[-1]
        shift = len(f) - 1 - dg
        f = [lg * c for c in f]
        for i, c in enumerate(g):
            f[i + shift] -= lf * c
        f.pop()
        while f and f[-1] == 0:
            f.pop()
    return f


def _uni_primitive(f: list) -> list:
    g = _int_content(f)
    if f[-1] < 0:
        g = -g
    return [c // g for c in f]


def _uni_gcd(a: list, b: list) -> list:
    if len(a) < len(b):
        a, b = b, a
    a, b = _uni_primitive(a), _uni_primitive(b)
    while b:
        r = _uni_prem(a, b)
        if not r:
            return b
        if len(r) == 1:
            return [1]
        a, b = b, _uni_primitive(r)
    return a


def _normalize(p: MultiPolynomial) -> MultiPolynomial:
    if p.is_zero():
        return p
    return p.primitive()[1]


def _content(coeffs: Mapping[int, MultiPolynomial]) -> MultiPolynomial:
    g = ZERO
    for c in coeffs.values():
        g = poly_gcd(g, c)
        if g.is_constant():
            return ONE
    return g


def _prem(f: Dict[int, MultiPolynomial], g: Dict[int, MultiPolynomial]) -> Dict[int, MultiPolynomial]:
    """Pseudo-remainder of univariate polynomials with polynomial coefficients."""
    dg = max(g)
    lg = g[dg]
    f = dict(f)
    while f and max(f) >= dg:
        df = max(f)
        lf = f[df]
        shift = df - dg
        new = {d: c * lg for d, c in f.items()}
        for d, c in g.items():
            v = new.get(d + shift, ZERO) - lf * c
            if v.is_zero():
                new.pop(d + shift, None)
            else:
                new[d + shift] = v
        new.pop(df, None)
        f = new
    return f


def poly_gcd(a: MultiPolynomial, b: MultiPolynomial) -> MultiPolynomial:
    """Greatest common divisor, normalized to be primitive with positive leading coefficient."""
    if a.is_zero():
        return _normalize(b)
    if b.is_zero():
        return _normalize(a)
    if a.is_constant() or b.is_constant():
        return ONE
    va, vb = a.variables(), b.variables()
    common = va & vb
    if not common:
        # a common factor can only involve shared variables
        return ONE
    if len(va | vb) == 1:
        (x,) = tuple(va)
        g = _uni_gcd(_uni_to_ints(a, x), _uni_to_ints(b, x))
        return MultiPolynomial._raw({_unit(x, d): Fraction(c) for d, c in enumerate(g) if c})
    # main variable: one shared variable of smallest combined degree
    x = min(common, key=lambda i: (a.degree(i) + b.degree(i), i))
    A, B = a.coefficients_in(x), b.coefficients_in(x)
    ca, cb = _content(A), _content(B)
    c = poly_gcd(ca, cb)
    A = {d: p.exquo(ca) for d, p in A.items()}
    B = {d: p.exquo(cb) for d, p in B.items()}
    if max(A) < max(B):
        A, B = B, A
    while True:
        R = _prem(A, B)
        if not R:
            g = B
            break
        if max(R) == 0:
            g = {0: ONE}
            break
        cr = _content(R)
        A, B = B, {d: p.exquo(cr) for d, p in R.items()}
    return _normalize(c * MultiPolynomial.from_coefficients(x, g))


def symbols(*names: str) -> Tuple[MultiPolynomial, ...]:
    return tuple(MultiPolynomial.symbol(n) for n in names)
