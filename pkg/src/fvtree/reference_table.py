"""Published merge-transition table for the 36 unmarked basis elements with at most four pairs.

Each entry is ``(label, [(multiplicity, target index), ...])`` where the
label lists the sample pairs (a repeated pair doubles the weight).  The
table is reproduced verbatim, including any misprints, so that it can be
compared against the transitions derived by :mod:`fvtree.basis`.
"""

from fractions import Fraction
from typing import List, Tuple

REFERENCE_TRANSITIONS: List[Tuple[str, List[Tuple[int, int]]]] = [
    ("∅", []),
    ("12", [(1, 0)]),
    ("12,12", [(1, 0)]),
    ("12,23", [(2, 1), (1, 2)]),
    ("12,34", [(2, 1), (4, 3)]),
    ("12,12,12", [(1, 0)]),
    ("12,12,23", [(1, 1), (1, 2), (1, 5)]),
    ("12,13,23", [(3, 2)]),
    ("12,12,34", [(1, 1), (1, 2), (4, 6)]),
    ("12,23,24", [(3, 3), (3, 6)]),
    ("12,23,34", [(3, 3), (2, 6), (1, 7)]),
    ("12,23,45", [(1, 3), (2, 4), (1, 8), (2, 9), (4, 10)]),
    ("12,34,56", [(3, 4), (12, 11)]),
    ("12,12,12,12", [(1, 0)]),
    ("12,12,12,23", [(1, 1), (1, 5), (1, 13)]),
    ("12,12,23,23", [(2, 2), (1, 13)]),
    ("12,12,13,23", [(1, 2), (2, 5)]),
    ("12,12,23,34", [(1, 3), (2, 6), (1, 14), (1, 15), (1, 16)]),
    ("12,23,23,34", [(1, 3), (2, 6), (2, 14), (1, 16)]),
    ("12,13,23,34", [(3, 6), (1, 7), (2, 16)]),
    ("12,23,34,14", [(4, 7), (2, 16)]),
    ("12,12,23,24", [(1, 3), (2, 6), (2, 14), (1, 15)]),
    ("12,12,34,34", [(2, 2), (4, 15)]),
    ("12,12,12,34", [(1, 1), (1, 5), (4, 14)]),
    ("12,23,34,45", [(4, 10), (2, 17), (1, 18), (2, 19), (1, 20)]),
    ("12,23,34,25", [(2, 9), (2, 10), (1, 17), (2, 18), (2, 19), (1, 21)]),
    ("12,23,24,25", [(4, 9), (6, 21)]),
    ("12,12,34,45", [(1, 3), (2, 8), (4, 17), (2, 21), (1, 22)]),
    ("12,12,23,45", [(1, 4), (1, 6), (1, 8), (2, 17), (2, 18), (2, 21), (1, 23)]),
    ("12,23,13,45", [(1, 7), (3, 8), (6, 19)]),
    ("12,23,45,56", [(4, 11), (4, 24), (4, 25), (1, 26), (2, 27)]),
    ("12,12,34,56", [(1, 4), (2, 8), (4, 27), (8, 28)]),
    ("12,23,24,56", [(1, 9), (3, 11), (6, 25), (2, 26), (3, 28)]),
    ("12,23,34,56", [(1, 10), (3, 11), (4, 24), (4, 25), (2, 28), (1, 29)]),
    ("12,23,45,67", [(2, 11), (2, 12), (4, 30), (1, 31), (4, 32), (8, 33)]),
    ("12,34,56,78", [(4, 12), (24, 34)]),
]

# Displayed upper-left 13x13 block of minus the unmarked generator matrix,
# in the order of REFERENCE_TRANSITIONS; diagonal entries are (λ coefficient, constant).
REFERENCE_NEG_A_BLOCK: List[List[object]] = [
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [-1, (1, 1), 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [-1, 0, (2, 1), 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 2, -1, (2, 3), 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 2, 0, -4, (2, 6), 0, 0, 0, 0, 0, 0, 0, 0],
    [-1, 0, 0, 0, 0, (3, 1), 0, 0, 0, 0, 0, 0, 0],
    [0, -1, -1, 0, 0, -1, (3, 3), 0, 0, 0, 0, 0, 0],
    [0, 0, -3, 0, 0, 0, 0, (3, 3), 0, 0, 0, 0, 0],
    [0, -1, -1, 0, 0, 0, -4, 0, (3, 6), 0, 0, 0, 0],
    [0, 0, 0, -3, 0, 0, -3, 0, 0, (3, 6), 0, 0, 0],
    [0, 0, 0, -3, 0, 0, -2, -1, 0, 0, (3, 6), 0, 0],
    [0, 0, 0, -1, -2, 0, 0, 0, -1, -2, -4, (3, 10), 0],
    [0, 0, 0, 0, -3, 0, 0, 0, 0, 0, 0, -12, (3, 15)],
]

# Marked basis ^∅, ^12, ^12(2λ), ^12,23, ^12,34: displayed block of minus the
# marked generator (diagonal entries are (λ coefficient, ϑ coefficient, constant)).
REFERENCE_MARKED_LABELS: List[str] = ["^∅", "^12", "^12,12", "^12,23", "^12,34"]
REFERENCE_MARKED_NEG_A_BLOCK: List[List[object]] = [
    [0, 0, 0, 0, 0],
    [-1, (1, 2, 1), 0, 0, 0],
    [-1, 0, (2, 2, 1), 0, 0],
    [0, 2, -1, (2, 3, 3), 0],
    [0, 2, 0, -4, (2, 4, 6)],
]

# Marked generator rows as stated in closed form: label -> (diagonal, [(multiplicity, target)]).
REFERENCE_MARKED_ROWS: List[Tuple[str, Tuple[int, int, int], List[Tuple[int, str]]]] = [
    ("^12", (1, 2, 1), [(1, "^∅")]),
    ("^12,23", (2, 3, 3), [(4, "^12")]),
    ("^12,34", (2, 4, 6), [(4, "^12,23"), (2, "^12")]),
]


def printed_formulas():
    """Closed forms as printed, built as rational functions.

    Keys: ``psi12``, ``psi12_23``, ``psi12_34``, ``ratio2``, ``variance``,
    ``z_cov`` (in s, t, λ) and ``z_third`` (``E[Z_t^3]/λ^{3/2}`` in t, λ).
    """
    from .algebra import rf_symbols

    L, s, t = rf_symbols("λ", "s", "t")
    u = s + t
    tl = t * L
    return {
        "psi12": 1 / (L + 1),
        "psi12_23": (5 * L + 3) / ((L + 1) * (2 * L + 1) * (2 * L + 3)),
        "psi12_34": (4 * L**2 + 18 * L + 9) / ((L + 1) * (L + 3) * (2 * L + 1) * (2 * L + 3)),
        "ratio2": (4 * L**4 + 26 * L**3 + 49 * L**2 + 36 * L + 9) / (4 * L**4 + 24 * L**3 + 47 * L**2 + 36 * L + 9),
        "variance": 2 * L**2 / ((L + 3) * (2 * L + 1) * (2 * L + 3)),
        "z_cov": 4 * s * t * L**3 / ((u * L + 1) * (u * L + 3) * (u * L + 6)),
        "z_third": 16 * t**3 * L**3 * (5 * tl**2 + 9 * tl - 10)
        / ((tl + 2) * (tl + 3) * (tl + 5) * (2 * tl + 1) * (2 * tl + 3) * (3 * tl + 1) * (3 * tl + 10)),
    }


# Normalized power means printed only through their leading coefficients:
# k -> (numerator leading coefficients, denominator leading coefficients, degree,
#       coefficients a1, a2 of the expansion 1 + a1/λ + a2/λ² + ...).
PRINTED_LEADING = {
    3: ((36, 618, 4143), (36, 564, 3487), 7, (Fraction(3, 2), Fraction(-95, 18))),
    4: ((36864, 1536000, 28807680), (36864, 1425408, 24729088), 16, (Fraction(3), Fraction(-193, 36))),
}
