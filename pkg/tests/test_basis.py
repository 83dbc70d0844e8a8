import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fvtree.algebra import RationalFunction, rf_symbols
from fvtree.basis import (
    MAX_VERTICES,
    BasisNotClosedError,
    VertexBoundError,
    apply_generator,
    canonicalize,
    closure,
    diagonal_entry,
    encode,
    merge,
    merge_targets,
    multiply_disjoint,
    psi,
    to_matrix,
)
from fvtree.reference_table import REFERENCE_TRANSITIONS

L, T = rf_symbols("λ", "ϑ")


@st.composite
def raw_graphs(draw, max_n=6):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(1, 6))
    edges = []
    for _ in range(m):
        i = draw(st.integers(0, n - 1))
        j = draw(st.integers(0, n - 1).filter(lambda x: x != i))
        edges.append((i, j, (("λ", draw(st.integers(1, 2))),)))
    return edges


@settings(max_examples=80, deadline=None)
@given(raw_graphs(), st.randoms(use_true_random=False))
def test_canonical_form_is_relabel_invariant(edges, rnd):
    verts = sorted({v for e in edges for v in e[:2]})
    perm = verts[:]
    rnd.shuffle(perm)
    relabel = dict(zip(verts, perm))
    g = canonicalize(edges)
    h = canonicalize([(relabel[i], relabel[j], w) if rnd.random() < 0.5 else (relabel[j], relabel[i], w) for i, j, w in edges])
    assert g == h
    assert encode(g) == encode(h)


@settings(max_examples=60, deadline=None)
@given(raw_graphs())
def test_parse_encode_roundtrip(edges):
    g = canonicalize(edges)
    assert psi(encode(g)) == g


def test_parallel_edges_sum_weights():
    assert psi("12,12") == psi("12(2λ)")
    assert psi("12,23") == psi("13,23") == psi("12,13")
    assert psi("12,23") != psi("12,34")


@settings(max_examples=60, deadline=None)
@given(raw_graphs(max_n=5), st.booleans())
def test_row_sum_vanishes_without_growth(edges, marked):
    # with λ = ϑ = 0 every test function is the constant 1, so Ω1 = 0
    g = canonicalize(edges, marked=marked)
    total = sum((c for _, c in apply_generator(g).items()), RationalFunction())
    assert total.evaluate({"λ": 0, "ϑ": 0}) == 0


def test_merge_count_is_binomial():
    for lab, _ in REFERENCE_TRANSITIONS[1:]:
        g = psi(lab)
        assert sum(merge_targets(g).values()) == g.n * (g.n - 1) // 2


def test_diagonal_entries():
    assert diagonal_entry(psi("12")) == -(L + 1)
    assert diagonal_entry(psi("12,34")) == -(2 * L + 6)
    assert diagonal_entry(psi("12", marked=True)) == -(L + 2 * T + 1)
    assert diagonal_entry(psi("12,23,34", marked=True)) == -(3 * L + 4 * T + 6)


def _row(lab, marked=False):
    g = psi(lab, marked=marked)
    return {h: c for h, c in apply_generator(g).items() if h != g}


def _expect(d, marked=False):
    return {psi(k, marked=marked): v for k, v in d.items()}


def test_hand_derived_transitions():
    assert _row("12") == _expect({"∅": 1})
    assert _row("12,23") == _expect({"12": 2, "12(2λ)": 1})
    assert _row("12,34") == _expect({"12": 2, "12,13": 4})
    assert _row("12,13,23") == _expect({"12(2λ)": 3})


def test_misprinted_items_pinned():
    # item 20 sends a 4-cycle to Ψ^{12,12,23,23}, not Ψ^{12,12,13,23}
    assert _row("12,23,34,14") == _expect({"12,13,23": 4, "12(2λ),23(2λ)": 2})
    # item 24 (path on five vertices) has no Ψ^{12,23,23,34} term but one Ψ^{12,12,23,24}
    row = _row("12,23,34,45")
    assert psi("12,23,23,34") not in row
    assert row[psi("12,12,23,24")] == 1


def test_marked_row_of_two_path():
    assert _row("12,23", marked=True) == _expect({"12": 2, "12(2λ)": 1}, marked=True)


def test_matrix_is_triangular_and_closed():
    basis = closure([psi("12,34,56")])
    M = to_matrix(basis)
    for (i, j) in M.entries:
        assert j == i or basis[j].n < basis[i].n
    with pytest.raises(BasisNotClosedError):
        to_matrix([psi("12,34")])


def test_vertex_bound():
    g = psi("12,34,56,78")
    with pytest.raises(VertexBoundError):
        multiply_disjoint(g, psi("12,34,56"))
    assert MAX_VERTICES == 10


def test_merge_validates():
    with pytest.raises(ValueError):
        merge(psi("12"), 1, 1)
    assert merge(psi("12,34"), 2, 3) == psi("12,23")


def test_random_relabel_of_reference_items():
    rnd = random.Random(5)
    for lab, _ in REFERENCE_TRANSITIONS[1:]:
        g = psi(lab)
        perm = list(range(g.n))
        rnd.shuffle(perm)
        h = canonicalize([(perm[i], perm[j], w) for i, j, w in g.edges])
        assert h == g
