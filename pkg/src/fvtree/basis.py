"""Pair-multigraph basis of exponential test functions and the generator acting on it.

A basis element is a multigraph on sample indices ``1..n``.  An edge ``ij``
with weight ``w = Σ c_σ σ`` stands for the factor ``exp(-w·r(u_i, u_j))``,
where ``r`` is the genealogical distance.  A marked element additionally
multiplies each edge by the indicator that the two endpoints carry the
same type.  Parallel edges are stored as one edge with summed weight, so
``12,12`` and ``12(2λ)`` are the same element.
"""

from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

from .algebra import RationalFunction, as_rf

MAX_VERTICES = 10
DEFAULT_PARAMS: Tuple[str, ...] = ("λ",)
TWO_PARAMS: Tuple[str, ...] = ("λ", "λ'")

Weight = Tuple[Tuple[str, int], ...]
Edge = Tuple[int, int, Weight]


class VertexBoundError(ValueError):
    pass


class BasisNotClosedError(ValueError):
    pass


@dataclass(frozen=True)
class PairGraph:
    """Canonical pair-multigraph; construct through :func:`canonicalize` or :meth:`parse`."""

    n: int
    edges: Tuple[Edge, ...]
    marked: bool = False
    params: Tuple[str, ...] = DEFAULT_PARAMS

    @property
    def vertex_count(self) -> int:
        return self.n

    def sort_key(self) -> tuple:
        return (self.n, self.edges)

    def total_weight(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for _, _, w in self.edges:
            for sym, c in w:
                out[sym] = out.get(sym, 0) + c
        return out

    @classmethod
    def parse(cls, text: str, marked: bool = False, params: Sequence[str] = DEFAULT_PARAMS) -> "PairGraph":
        return parse_graph(text, marked=marked, params=params)

    def __str__(self) -> str:
        return encode(self)

    def __repr__(self) -> str:
        hat = "Ψ̂" if self.marked else "Ψ"
        return f"{hat}[{encode(self, with_mark=False)}]"


def _norm_weight(w) -> Weight:
    if isinstance(w, str):
        w = {w: 1}
    elif isinstance(w, tuple) and w and isinstance(w[0], tuple):
        w = dict(w)
    items = tuple(sorted((s, int(c)) for s, c in dict(w).items() if c))
    if not items or any(c < 0 for _, c in items):
        raise ValueError(f"edge weight must be a nonzero nonnegative combination, got {w!r}")
    return items


def _add_weights(a: Weight, b: Weight) -> Weight:
    d = dict(a)
    for s, c in b:
        d[s] = d.get(s, 0) + c
    return tuple(sorted(d.items()))


# ---------------------------------------------------------------------------
# canonicalization

_memo: Dict[tuple, Tuple[int, Tuple[Edge, ...]]] = {}
_memo_lock = threading.Lock()


def _refine(n: int, adj: List[List[Tuple[int, Weight]]]) -> List[tuple]:
    inv = [tuple(sorted(w for _, w in adj[v])) for v in range(n)]
    classes = len(set(inv))
    for _ in range(n):
        new = [(inv[v], tuple(sorted((w, inv[u]) for u, w in adj[v]))) for v in range(n)]
        # compress to ranks so invariants stay small
        ranks = {x: i for i, x in enumerate(sorted(set(new)))}
        new = [(ranks[x],) for x in new]
        if len(set(new)) == classes:
            break
        inv, classes = new, len(set(new))
    return inv


def _min_encoding(n: int, edges: List[Edge]) -> Tuple[Edge, ...]:
    adj: List[List[Tuple[int, Weight]]] = [[] for _ in range(n)]
    for i, j, w in edges:
        adj[i].append((j, w))
        adj[j].append((i, w))
    inv = _refine(n, adj)
    groups: Dict[tuple, List[int]] = {}
    for v in range(n):
        groups.setdefault(inv[v], []).append(v)
    ordered = [groups[k] for k in sorted(groups)]
    best = None
    for perms in itertools.product(*(itertools.permutations(g) for g in ordered)):
        label = [0] * n
        pos = 0
        for block in perms:
            for v in block:
                label[v] = pos
                pos += 1
        enc = tuple(sorted((min(label[i], label[j]), max(label[i], label[j]), w) for i, j, w in edges))
        if best is None or enc < best:
            best = enc
    return best if best is not None else ()


def canonicalize(
    edges: Iterable[tuple],
    marked: bool = False,
    params: Sequence[str] = DEFAULT_PARAMS,
) -> PairGraph:
    """Canonical form of a raw multigraph given as ``(i, j[, weight])`` triples.

    Vertex labels may be any hashable values.  Parallel edges are merged by
    adding weights, self-loops are dropped and isolated vertices vanish.
    The weight defaults to the first declared parameter.
    """
    params = tuple(params)
    merged: Dict[Tuple, Weight] = {}
    for e in edges:
        if len(e) == 2:
            i, j = e
            w = ((params[0], 1),)
        else:
            i, j, w = e
            w = _norm_weight(w)
        for s, _ in w:
            if s not in params:
                raise ValueError(f"weight symbol {s!r} not among parameters {params}")
        if i == j:
            continue
        key = (i, j) if _sortable(i) <= _sortable(j) else (j, i)
        merged[key] = _add_weights(merged[key], w) if key in merged else w
    verts = sorted({v for k in merged for v in k}, key=_sortable)
    n = len(verts)
    if n > MAX_VERTICES:
        raise VertexBoundError(f"{n} vertices exceed the bound {MAX_VERTICES}")
    index = {v: k for k, v in enumerate(verts)}
    raw = tuple(sorted((min(index[i], index[j]), max(index[i], index[j]), w) for (i, j), w in merged.items()))
    memo_key = (n, raw)
    with _memo_lock:
        hit = _memo.get(memo_key)
    if hit is None:
        hit = (n, _min_encoding(n, list(raw)))
        with _memo_lock:
            _memo[memo_key] = hit
    return PairGraph(hit[0], hit[1], bool(marked), params)


def _sortable(v):
    return (0, v) if isinstance(v, int) else (1, str(v))


# ---------------------------------------------------------------------------
# text encoding


def _render_weight(w: Weight, params: Tuple[str, ...]) -> str:
    if w == ((params[0], 1),):
        return ""
    parts = []
    for s, c in sorted(w, key=lambda sc: params.index(sc[0])):
        parts.append(s if c == 1 else f"{c}{s}")
    return "(" + "+".join(parts) + ")"


def encode(g: PairGraph, with_mark: bool = True) -> str:
    prefix = "^" if (with_mark and g.marked) else ""
    if g.n == 0:
        return prefix + "∅"
    wide = g.n >= 10
    parts = []
    for i, j, w in g.edges:
        pair = f"{i + 1}-{j + 1}" if wide else f"{i + 1}{j + 1}"
        parts.append(pair + _render_weight(w, g.params))
    return prefix + ",".join(parts)


_EDGE_RE = re.compile(r"^\s*(\d+)(?:-(\d+)|(\d))\s*(?:\(([^)]*)\))?\s*$")
_TERM_RE = re.compile(r"^\s*(\d*)\s*(\S+?)\s*$")


def _parse_weight(text: str, params: Sequence[str]) -> Weight:
    out: Dict[str, int] = {}
    for term in text.split("+"):
        m = _TERM_RE.match(term)
        if not m:
            raise ValueError(f"bad weight term {term!r}")
        c = int(m.group(1)) if m.group(1) else 1
        sym = m.group(2).replace("′", "'")
        if sym in ("lambda", "l"):
            sym = "λ"
        if sym in ("lambda'", "l'"):
            sym = "λ'"
        if sym not in params:
            raise ValueError(f"unknown weight symbol {sym!r}")
        out[sym] = out.get(sym, 0) + c
    return tuple(sorted(out.items()))


def parse_graph(text: str, marked: bool = False, params: Sequence[str] = DEFAULT_PARAMS) -> PairGraph:
    """Parse encodings such as ``"12,34"``, ``"12,12"``, ``"12(2λ)"`` or ``"^12"`` (marked)."""
    text = text.strip()
    if text.startswith("^"):
        marked, text = True, text[1:].strip()
    if text in ("∅", "", "0", "empty"):
        return PairGraph(0, (), bool(marked), tuple(params))
    edges = []
    for piece in text.split(","):
        if piece.count("(") and not piece.strip().startswith("("):
            head, _, wt = piece.partition("(")
            wt = wt.rstrip().rstrip(")")
        else:
            head, wt = piece, ""
        head = head.strip()
        if "-" in head:
            a, b = head.split("-")
        elif len(head) == 2:
            a, b = head[0], head[1]
        else:
            raise ValueError(f"cannot parse edge {piece!r}")
        w = _parse_weight(wt, params) if wt else ((params[0], 1),)
        edges.append((int(a), int(b), w))
    return canonicalize(edges, marked=marked, params=params)


# ---------------------------------------------------------------------------
# combinatorial operations


def empty_graph(marked: bool = False, params: Sequence[str] = DEFAULT_PARAMS) -> PairGraph:
    return PairGraph(0, (), bool(marked), tuple(params))


def merge(g: PairGraph, k: int, l: int) -> PairGraph:
    """Identify vertices ``k`` and ``l`` (1-based): individual ``l`` is replaced by an offspring of ``k``."""
    if k == l or not (1 <= k <= g.n) or not (1 <= l <= g.n):
        raise ValueError(f"invalid merge ({k}, {l}) on {g.n} vertices")
    k0, l0 = k - 1, l - 1

    def relabel(v):
        return k0 if v == l0 else v

    return canonicalize(((relabel(i), relabel(j), w) for i, j, w in g.edges), g.marked, g.params)


def multiply_disjoint(a: PairGraph, b: PairGraph) -> PairGraph:
    """Product of two test functions: disjoint union with ``b`` relabeled above ``a``."""
    if a.marked != b.marked or a.params != b.params:
        raise ValueError("factors must share the marked flag and parameter list")
    if a.n + b.n > MAX_VERTICES:
        raise VertexBoundError(f"{a.n + b.n} vertices exceed the bound {MAX_VERTICES}")
    edges = list(a.edges) + [(i + a.n, j + a.n, w) for i, j, w in b.edges]
    return canonicalize(edges, a.marked, a.params)


def power(g: PairGraph, k: int) -> PairGraph:
    out = empty_graph(g.marked, g.params)
    for _ in range(k):
        out = multiply_disjoint(out, g)
    return out


# ---------------------------------------------------------------------------
# linear combinations and the generator


class LinearCombination:
    """Finite formal sum of basis elements with rational-function coefficients."""

    __slots__ = ("_coef",)

    def __init__(self, coef: Mapping[PairGraph, object] | None = None):
        self._coef: Dict[PairGraph, RationalFunction] = {}
        flags = set()
        for g, c in (coef or {}).items():
            c = as_rf(c)
            flags.add((g.marked, g.params))
            if not c.is_zero():
                self._coef[g] = self._coef[g] + c if g in self._coef else c
                if self._coef[g].is_zero():
                    del self._coef[g]
        if len(flags) > 1:
            raise ValueError("mixed marked flags or parameter lists in one combination")

    @classmethod
    def of(cls, g: PairGraph, c=1) -> "LinearCombination":
        return cls({g: c})

    def items(self):
        return self._coef.items()

    def keys(self):
        return self._coef.keys()

    def __getitem__(self, g: PairGraph) -> RationalFunction:
        return self._coef.get(g, RationalFunction())

    def __contains__(self, g) -> bool:
        return g in self._coef

    def __len__(self) -> int:
        return len(self._coef)

    def __iter__(self) -> Iterator[PairGraph]:
        return iter(self._coef)

    def __add__(self, other: "LinearCombination") -> "LinearCombination":
        out = dict(self._coef)
        for g, c in other.items():
            out[g] = out[g] + c if g in out else c
        return LinearCombination(out)

    def __sub__(self, other: "LinearCombination") -> "LinearCombination":
        return self + other.scale(-1)

    def scale(self, factor) -> "LinearCombination":
        factor = as_rf(factor)
        return LinearCombination({g: c * factor for g, c in self._coef.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, LinearCombination) and self._coef == other._coef

    def __str__(self) -> str:
        if not self._coef:
            return "0"
        return " + ".join(f"({c})·Ψ[{g}]" for g, c in sorted(self._coef.items(), key=lambda kv: kv[0].sort_key()))

    __repr__ = __str__


def weight_value(w: Weight) -> RationalFunction:
    total = RationalFunction()
    for sym, c in w:
        total = total + RationalFunction.symbol(sym) * c
    return total


def diagonal_entry(g: PairGraph) -> RationalFunction:
    """Exit rate of ``g`` with sign: minus (growth + mutation + resampling)."""
    rate = RationalFunction(g.n * (g.n - 1) // 2)
    for _, _, w in g.edges:
        rate = rate + weight_value(w)
    if g.marked:
        rate = rate + RationalFunction.symbol("ϑ") * g.n
    return -rate


def merge_targets(g: PairGraph) -> Dict[PairGraph, int]:
    """Multiset of merge results over all unordered vertex pairs."""
    out: Dict[PairGraph, int] = {}
    for k in range(1, g.n + 1):
        for l in range(k + 1, g.n + 1):
            h = merge(g, k, l)
            out[h] = out.get(h, 0) + 1
    return out


_gen_cache: Dict[PairGraph, "LinearCombination"] = {}


def apply_generator(g: PairGraph) -> LinearCombination:
    """Generator applied to ``Ψ_g``: growth, pairwise resampling and (marked) mutation."""
    hit = _gen_cache.get(g)
    if hit is not None:
        return hit
    coef: Dict[PairGraph, object] = {g: diagonal_entry(g)} if g.n else {}
    for h, m in merge_targets(g).items():
        coef[h] = m
    out = LinearCombination(coef)
    _gen_cache[g] = out
    return out


def closure(seeds: Iterable[PairGraph]) -> List[PairGraph]:
    """Smallest generator-closed set containing ``seeds``, sorted by (vertex count, encoding)."""
    seen = set()
    stack = list(seeds)
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        stack.extend(h for h in merge_targets(g) if h not in seen)
    if not seen:
        return []
    flags = {(g.marked, g.params) for g in seen}
    if len(flags) > 1:
        raise ValueError("seeds mix marked flags or parameter lists")
    return sorted(seen, key=PairGraph.sort_key)


@dataclass(frozen=True)
class GeneratorMatrix:
    """Generator restricted to a closed basis: ``entries[(row, col)]`` is the coefficient of col in Ω(row)."""

    basis: Tuple[PairGraph, ...]
    entries: Mapping[Tuple[int, int], RationalFunction]

    def index(self, g: PairGraph) -> int:
        return self._index()[g]

    def _index(self) -> Dict[PairGraph, int]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {g: i for i, g in enumerate(self.basis)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def __len__(self) -> int:
        return len(self.basis)

    def diagonal(self, i: int) -> RationalFunction:
        return self.entries.get((i, i), RationalFunction())

    def row(self, i: int) -> Dict[int, RationalFunction]:
        return {c: v for (r, c), v in self.entries.items() if r == i}

    def column(self, j: int) -> Dict[int, RationalFunction]:
        return {r: v for (r, c), v in self.entries.items() if c == j}

    def substitute(self, mapping) -> "GeneratorMatrix":
        return GeneratorMatrix(self.basis, {k: v.substitute(mapping) for k, v in self.entries.items()})

    def dense(self) -> List[List[RationalFunction]]:
        n = len(self.basis)
        return [[self.entries.get((i, j), RationalFunction()) for j in range(n)] for i in range(n)]


def to_matrix(basis: Sequence[PairGraph]) -> GeneratorMatrix:
    """Matrix of the generator on a closed, ordered basis."""
    basis = tuple(basis)
    idx = {g: i for i, g in enumerate(basis)}
    entries: Dict[Tuple[int, int], RationalFunction] = {}
    for i, g in enumerate(basis):
        for h, c in apply_generator(g).items():
            j = idx.get(h)
            if j is None:
                raise BasisNotClosedError(f"Ω(Ψ[{g}]) leaves the basis at Ψ[{h}]")
            if j != i and h.n >= g.n:
                raise BasisNotClosedError(f"non-triangular transition {g} -> {h}")
            entries[(i, j)] = c
    return GeneratorMatrix(basis, entries)


def psi(text: str = "∅", marked: bool = False, params: Sequence[str] = DEFAULT_PARAMS) -> PairGraph:
    """Shorthand for :func:`parse_graph`."""
    return parse_graph(text, marked=marked, params=params)
