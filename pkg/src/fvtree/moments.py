"""Exact equilibrium moments, semigroup evolution and series for coalescent quantities.

Equilibrium expectations follow from stationarity ``E[ΩΨ_g] = 0``: the
generator is triangular in the vertex count, so each value is a forward
substitution over elements with fewer vertices.  Conditional expectations
``E[Φ(X_t) | X_0]`` are solved component-wise by variation of constants.
"""

from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple, Union

import mpmath

from .algebra import CoincidentRateError, ExpPolynomial, RationalFunction, as_rf, rf_symbols
from .basis import (
    DEFAULT_PARAMS,
    TWO_PARAMS,
    GeneratorMatrix,
    LinearCombination,
    PairGraph,
    apply_generator,
    closure,
    empty_graph,
    multiply_disjoint,
    power,
    psi,
    to_matrix,
)


class NonDiagonalizableError(ArithmeticError):
    """A coupled pair of basis elements shares a symbolic diagonal entry."""


# ---------------------------------------------------------------------------
# equilibrium


class EquilibriumTable(dict):
    """Map basis element -> equilibrium expectation."""

    def expectation(self, combo: LinearCombination) -> RationalFunction:
        total = RationalFunction()
        for g, c in combo.items():
            total = total + c * self[g]
        return total


_eq_memo: Dict[Tuple[PairGraph, tuple], RationalFunction] = {}
_eq_lock = threading.RLock()


def equilibrium_value(g: PairGraph, bindings: Optional[Mapping[str, Fraction]] = None) -> RationalFunction:
    """Equilibrium expectation of a single basis element (memoized)."""
    key_b = tuple(sorted((bindings or {}).items()))
    for h in closure([g]):
        key = (h, key_b)
        with _eq_lock:
            if key in _eq_memo:
                continue
        value = _solve_row(h, key_b, bindings)
        with _eq_lock:
            _eq_memo[key] = value
    return _eq_memo[(g, key_b)]


def _solve_row(h: PairGraph, key_b, bindings) -> RationalFunction:
    if h.n == 0:
        return RationalFunction(1)
    acc = RationalFunction()
    diag = None
    for target, c in apply_generator(h).items():
        if bindings:
            c = as_rf(c.evaluate(bindings))
        if target == h:
            diag = c
        else:
            acc = acc + c * _eq_memo[(target, key_b)]
    if diag is None or diag.is_zero():
        raise ZeroDivisionError(f"zero diagonal entry for {h}")
    return acc / (-diag)


def equilibrium(matrix: Union[GeneratorMatrix, Iterable[PairGraph]]) -> EquilibriumTable:
    """Forward substitution ``m_k = Σ_{j≺k} A_kj m_j / (-A_kk)`` with ``m_∅ = 1``."""
    if not isinstance(matrix, GeneratorMatrix):
        matrix = to_matrix(list(matrix))
    m: Dict[int, RationalFunction] = {}
    for i, g in enumerate(matrix.basis):
        if g.n == 0:
            m[i] = RationalFunction(1)
            continue
        acc = RationalFunction()
        for j, c in matrix.row(i).items():
            if j != i:
                acc = acc + c * m[j]
        diag = matrix.diagonal(i)
        if diag.is_zero():
            raise ZeroDivisionError(f"zero diagonal entry for {g}")
        m[i] = acc / (-diag)
    return EquilibriumTable({g: m[i] for i, g in enumerate(matrix.basis)})


def expectation(combo: Union[LinearCombination, PairGraph], bindings=None) -> RationalFunction:
    if isinstance(combo, PairGraph):
        combo = LinearCombination.of(combo)
    total = RationalFunction()
    for g, c in combo.items():
        if bindings:
            c = as_rf(c.evaluate(bindings))
        total = total + c * equilibrium_value(g, bindings)
    return total


# ---------------------------------------------------------------------------
# named elements

PSI_EMPTY = psi("∅")
PSI_12 = psi("12")


def psi12_power(k: int, marked: bool = False) -> PairGraph:
    return power(psi("12", marked=marked), k)


def centered_moment(k: int, lam=None, marked: bool = False) -> RationalFunction:
    """``E[((λ+1)Ψ^{12} - 1)^k]`` at equilibrium by binomial expansion."""
    if k < 1:
        raise ValueError("order must be positive")
    L = RationalFunction.symbol("λ")
    bindings = None if lam is None else {"λ": Fraction(lam)}
    a = L + 1 if lam is None else RationalFunction(Fraction(lam) + 1)
    total = RationalFunction()
    for j in range(k + 1):
        term = a ** j * expectation(psi12_power(j, marked), bindings) * comb(k, j)
        total = total + (term if (k - j) % 2 == 0 else -term)
    return total


def normalized_power_mean(k: int) -> RationalFunction:
    """``(λ+1)^k E[Ψ^{12,34,...}]`` with k disjoint pairs."""
    L = RationalFunction.symbol("λ")
    return (L + 1) ** k * expectation(psi12_power(k))


# ---------------------------------------------------------------------------
# evolution


class EvolutionExpansion(dict):
    """Map basis element -> ExpPolynomial: ``E[Φ(X_t) | X_0] = Σ_g c_g(t) Ψ_g(X_0)``."""

    def at_zero(self) -> LinearCombination:
        return LinearCombination({g: e.at_zero() for g, e in self.items()})

    def limit(self) -> LinearCombination:
        return LinearCombination({g: e.limit() for g, e in self.items()})

    def stationary_expectation(self, bindings=None) -> ExpPolynomial:
        """``E[Φ(X_t)]`` when ``X_0`` is at equilibrium."""
        total = ExpPolynomial()
        for g, e in self.items():
            total = total + e.scale(equilibrium_value(g, bindings))
        return total

    def paired_expectation(self, other: PairGraph, bindings=None) -> ExpPolynomial:
        """``E[Ψ_other(X_0) Φ(X_t)]`` when ``X_0`` is at equilibrium."""
        total = ExpPolynomial()
        for g, e in self.items():
            total = total + e.scale(equilibrium_value(multiply_disjoint(other, g), bindings))
        return total


def evolve(
    combo: Union[LinearCombination, PairGraph],
    matrix: Optional[GeneratorMatrix] = None,
    bindings: Optional[Mapping[str, Fraction]] = None,
) -> EvolutionExpansion:
    """Solve ``d/dt c = Aᵀ c`` with ``c(0)`` the coefficients of ``combo``.

    Components are processed from the top of the triangular order down;
    each is ``c_j(t) = c_j(0) e^{A_jj t} + ∫₀ᵗ e^{A_jj (t-s)} Σ_{g≻j} A_gj c_g(s) ds``.
    With ``bindings`` the matrix is first evaluated at those values, and
    numerically coincident rates then produce ``t^d e^{-μt}`` terms.
    """
    if isinstance(combo, PairGraph):
        combo = LinearCombination.of(combo)
    if matrix is None:
        matrix = to_matrix(closure(combo.keys()))
    if bindings:
        matrix = GeneratorMatrix(matrix.basis, {k: as_rf(v.evaluate(bindings)) for k, v in matrix.entries.items()})
        combo = LinearCombination({g: as_rf(c.evaluate(bindings)) for g, c in combo.items()})
    idx = {g: i for i, g in enumerate(matrix.basis)}
    for g in combo.keys():
        if g not in idx:
            raise ValueError(f"Ψ[{g}] is not in the basis")
    cols: Dict[int, Dict[int, RationalFunction]] = {}
    for (r, c), v in matrix.entries.items():
        if r != c:
            cols.setdefault(c, {})[r] = v
    sol: Dict[int, ExpPolynomial] = {}
    for j in range(len(matrix.basis) - 1, -1, -1):
        g = matrix.basis[j]
        mu = -matrix.diagonal(j)
        forcing = ExpPolynomial()
        for r, a in cols.get(j, {}).items():
            if r in sol:
                forcing = forcing + sol[r].scale(a)
        init = combo[g]
        if forcing.is_zero() and init.is_zero():
            continue
        try:
            value = forcing.convolve(mu, allow_coincident=mu.is_constant())
        except CoincidentRateError as exc:
            raise NonDiagonalizableError(f"non-diagonalizable block at Ψ[{g}]: {exc}") from None
        if not init.is_zero():
            value = value + ExpPolynomial.exponential(mu, init)
        if not value.is_zero():
            sol[j] = value
    return EvolutionExpansion({matrix.basis[j]: e for j, e in sol.items()})


def increment_moment(k: int, lam=None) -> ExpPolynomial:
    """``E[(Ψ^{12}(X_t) - Ψ^{12}(X_0))^k]`` started at equilibrium, for k ∈ {2, 4}.

    Cross moments ``E[Ψ^{12}(X_0)^b Ψ^{12}(X_t)^a]`` are assembled from the
    evolution of ``(Ψ^{12})^a`` paired with ``(Ψ^{12})^b`` at time 0.  With
    ``lam`` the computation runs at that fixed rational value of λ.
    """
    if k not in (2, 4):
        raise ValueError("increment moments are provided for k = 2 and k = 4")
    bindings = None if lam is None else {"λ": Fraction(lam)}
    total = ExpPolynomial()
    for a in range(k + 1):
        b = k - a
        sign = -1 if b % 2 else 1
        if a == 0 or b == 0:
            term = ExpPolynomial.constant(expectation(psi12_power(k), bindings))
        else:
            exp_a = evolve(psi12_power(a), bindings=bindings)
            term = exp_a.paired_expectation(psi12_power(b), bindings)
        total = total + term.scale(comb(k, a) * sign)
    return total


# ---------------------------------------------------------------------------
# fluctuation profile moments


@dataclass(frozen=True)
class ZMoments:
    cov: RationalFunction
    """``E[Z_s Z_t]`` as a function of s, t, λ."""
    third_rational: RationalFunction
    """``E[Z_t^3] / λ^{3/2}`` as a function of t, λ."""


def z_moments() -> ZMoments:
    L, L2, s, t = rf_symbols("λ", "λ'", "s", "t")
    pair = psi("12,34(λ')", params=TWO_PARAMS)
    joint = equilibrium_value(pair)
    joint = joint.substitute({"λ": s * L, "λ'": t * L})
    cov = L * ((s * L + 1) * (t * L + 1) * joint - 1)
    third = centered_moment(3).substitute({"λ": t * L})
    return ZMoments(cov=cov, third_rational=third)


# ---------------------------------------------------------------------------
# series for the Kingman coalescent


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, x) -> bool:
        return self.lower <= x <= self.upper


@contextmanager
def _iv_prec(bits: int):
    old = mpmath.iv.prec
    mpmath.iv.prec = bits
    try:
        yield
    finally:
        mpmath.iv.prec = old


def _iv(x) -> Interval:
    # round outward when converting the endpoints to floats
    lo, hi = mpmath.mpf(x.a.a), mpmath.mpf(x.b.b)
    return Interval(float(mpmath.fsub(lo, abs(lo) * 2**-52, rounding="d")), float(mpmath.fadd(hi, abs(hi) * 2**-52, rounding="u")))


def tavare_mean_N(eps, tol: float = 1e-12, n_lines: Optional[int] = None) -> Interval:
    """Certified enclosure of the expected number of ancestral lines at depth ``eps``.

    For the infinite coalescent this is ``Σ_{k≥1} (2k-1) e^{-k(k-1)ε/2}``.
    With ``n_lines = N`` the sample is finite and the k-th term carries the
    factor ``N_[k]/N^(k)`` (falling over rising factorial), and the sum stops at N.
    The tail beyond ``K ≥ 1/2 + 1/√ε`` is bounded by ``(2/ε) e^{-K(K-1)ε/2}``.
    """
    eps = mpmath.mpf(eps) if not isinstance(eps, Fraction) else mpmath.mpf(eps.numerator) / eps.denominator
    if eps <= 0:
        raise ValueError("ε must be positive")
    with _iv_prec(113):
        iv = mpmath.iv
        e = iv.mpf(eps)
        total = iv.mpf(0)
        ratio = iv.mpf(1)
        k = 1
        kstar = int(math.ceil(0.5 + 1 / math.sqrt(float(eps)))) + 1
        while True:
            if n_lines is not None and k > n_lines:
                return _iv(total)
            if n_lines is not None and k > 1:
                ratio = ratio * iv.mpf(n_lines - k + 1) / iv.mpf(n_lines + k - 1)
            term = iv.mpf(2 * k - 1) * iv.exp(-iv.mpf(k * (k - 1)) * e / 2) * ratio
            total = total + term
            k += 1
            if k >= kstar:
                # remaining terms k..∞ bounded by (2/ε)·exp(-k(k-1)ε/2) (ratio ≤ 1)
                bound = (2 / e) * iv.exp(-iv.mpf(k * (k - 1)) * e / 2)
                if float(mpmath.mpf(bound.b)) < tol:
                    return _iv(total + iv.mpf([0, bound.b]))


def tavare_mean_N_value(eps, tol: float = 1e-12, n_lines: Optional[int] = None) -> float:
    return tavare_mean_N(eps, tol, n_lines).mid


def tn_moment(n: int, which: str = "mean") -> Union[Fraction, Interval]:
    """Moments of the depth ``T_n`` at which n lines remain in the infinite coalescent.

    ``T_n = Σ_{i>n} S_i / C(i,2)`` with independent unit exponentials ``S_i``.
    ``mean`` is exact; ``var`` and ``central4`` are certified enclosures.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if which == "mean":
        return Fraction(2, n)
    with _iv_prec(113):
        iv = mpmath.iv
        if which == "var":
            # 4 Σ_{i>n} 1/(i²(i-1)²) = 4(π²/3 - 2 H2(n) + 1/n² - 2/n) with H2(n) = Σ_{i≤n} 1/i²
            h2 = iv.mpf(0)
            for i in range(1, n + 1):
                h2 += iv.mpf(1) / (i * i)
            pi2 = iv.pi ** 2
            val = 4 * (pi2 / 3 - 2 * h2 + iv.mpf(1) / (n * n) - iv.mpf(2) / n)
            return _iv(val)
        if which == "central4":
            # κ4 of an exponential with mean m is 6 m^4, so μ4 = 3 Var² + 6 Σ m_i^4
            var = tn_moment(n, "var")
            s4 = _tail_power_sum(n, 4)
            lo = 3 * var.lower ** 2 + 6 * s4.lower
            hi = 3 * var.upper ** 2 + 6 * s4.upper
            return Interval(lo, hi)
    raise ValueError(f"unknown moment {which!r}")


def _tail_power_sum(n: int, p: int, terms: int = 20000) -> Interval:
    """Enclosure of ``Σ_{i>n} (2/(i(i-1)))^p`` via partial sums and an integral tail bound."""
    with _iv_prec(113):
        iv = mpmath.iv
        total = iv.mpf(0)
        last = n + terms
        for i in range(n + 1, last + 1):
            total += (iv.mpf(2) / (i * (i - 1))) ** p
        # for i > last: (2/(i(i-1)))^p ≤ (2/(i-1)²)^p, integral bound from last
        tail_hi = iv.mpf(2) ** p / ((2 * p - 1) * iv.mpf(last - 1) ** (2 * p - 1))
        return _iv(total + iv.mpf([0, tail_hi.b]))


# ---------------------------------------------------------------------------
# formula registry used by the command-line interface


def _marked_psi12() -> RationalFunction:
    return equilibrium_value(psi("12", marked=True))


def _mark_ratio() -> RationalFunction:
    return _marked_psi12() / equilibrium_value(PSI_12)


NAMED_FORMULAS: Dict[str, Tuple[str, Callable[[], RationalFunction]]] = {
    "psi12": ("equilibrium mean of Ψ^{12}", lambda: equilibrium_value(psi("12"))),
    "psi12_12": ("equilibrium mean of Ψ^{12,12}", lambda: equilibrium_value(psi("12,12"))),
    "psi12_23": ("equilibrium mean of Ψ^{12,23}", lambda: equilibrium_value(psi("12,23"))),
    "psi12_34": ("equilibrium mean of Ψ^{12,34}", lambda: equilibrium_value(psi("12,34"))),
    "variance": ("E[((λ+1)Ψ^{12}-1)^2] at equilibrium", lambda: centered_moment(2)),
    "third": ("E[((λ+1)Ψ^{12}-1)^3] at equilibrium", lambda: centered_moment(3)),
    "fourth": ("E[((λ+1)Ψ^{12}-1)^4] at equilibrium", lambda: centered_moment(4)),
    "ratio2": ("(λ+1)^2 E[Ψ^{12,34}]", lambda: normalized_power_mean(2)),
    "ratio3": ("(λ+1)^3 E[Ψ^{12,34,56}]", lambda: normalized_power_mean(3)),
    "ratio4": ("(λ+1)^4 E[Ψ^{12,34,56,78}]", lambda: normalized_power_mean(4)),
    "z_cov": ("E[Z_s Z_t] of the fluctuation profile", lambda: z_moments().cov),
    "z_third": ("E[Z_t^3]/λ^{3/2} of the fluctuation profile", lambda: z_moments().third_rational),
    "marked_psi12": ("equilibrium mean of marked Ψ^{12}", _marked_psi12),
    "marked_psi12_23": ("equilibrium mean of marked Ψ^{12,23}", lambda: equilibrium_value(psi("12,23", marked=True))),
    "marked_psi12_34": ("equilibrium mean of marked Ψ^{12,34}", lambda: equilibrium_value(psi("12,34", marked=True))),
    "mark_ratio": ("E[marked Ψ^{12}] / E[Ψ^{12}]", _mark_ratio),
}


def named_formula(name: str) -> RationalFunction:
    try:
        return NAMED_FORMULAS[name][1]()
    except KeyError:
        raise KeyError(f"unknown formula {name!r}; choose from {', '.join(sorted(NAMED_FORMULAS))}") from None
