"""Finite Moran model with its genealogy and types.

The population of ``N`` individuals carries an ultrametric genealogy: two
individuals are at distance equal to the time back to their most recent
common ancestor (single-counted).  Between events every distance grows at
speed 1.  Events:

* neutral resampling: every unordered pair at rate 1, direction uniform;
  the offspring of ``k`` replaces ``l``;
* mutation: every individual at rate ``theta``; with probability ``z`` the
  new type is uniform on [0, 1], otherwise a reflected uniform step of
  half-width ``kernel_width`` from the old type;
* additive selection: individual ``k`` reproduces at extra rate
  ``alpha * chi(type_k)`` onto a uniformly chosen other individual.

The genealogy is held as a binary tree (O(depth) work per event); the full
distance matrix is produced on demand by :meth:`MoranState.distance_matrix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace as dc_replace
from typing import Dict, Optional, Sequence

import numpy as np

from .kernels import moran as K
from .kernels.coalescent import kingman_merges
from .moments import tavare_mean_N_value
from .rng import replicate_rng

MIN_N, MAX_N = 2, 5000
FITNESS = ("identity",)


class MarkRatioUndefined(ValueError):
    """No pair of distinct individuals lies within the requested distance."""


@dataclass(frozen=True)
class MoranConfig:
    theta: float = 0.0
    z: float = 1.0
    alpha: float = 0.0
    chi: str = "identity"
    kernel_width: float = 0.05

    def __post_init__(self):
        if self.theta < 0 or self.alpha < 0:
            raise ValueError("rates must be nonnegative")
        if not 0.0 <= self.z <= 1.0:
            raise ValueError("z must lie in [0, 1]")
        if self.chi not in FITNESS:
            raise ValueError(f"fitness must be one of {FITNESS}")
        if not 0.0 < self.kernel_width <= 1.0:
            raise ValueError("kernel width must lie in (0, 1]")


@dataclass
class MoranState:
    """Tree-encoded Moran population.

    ``lam`` and ``eps`` fix the Laplace parameter of the running pair sum
    and the radius of the running ball-count integral; both integrals start
    at ``origin`` (see :meth:`reset_integrals`).
    """

    N: int
    config: MoranConfig
    parent: np.ndarray
    left: np.ndarray
    right: np.ndarray
    height: np.ndarray
    size: np.ndarray
    wt: np.ndarray
    types: np.ndarray
    state: np.ndarray
    istate: np.ndarray
    lam: float = 0.0
    eps: float = 0.0

    @property
    def clock(self) -> float:
        return float(self.state[K.CLOCK])

    @property
    def root(self) -> int:
        return int(self.istate[K.ROOT])

    @property
    def event_counts(self) -> Dict[str, int]:
        s = self.istate
        return {
            "neutral": int(s[K.N_NEUTRAL]),
            "mutation": int(s[K.N_MUT]),
            "selection": int(s[K.N_SEL]),
            "selection_rejected": int(s[K.N_REJECT]),
        }

    def copy(self) -> "MoranState":
        arrays = {
            k: getattr(self, k).copy()
            for k in ("parent", "left", "right", "height", "size", "wt", "types", "state", "istate")
        }
        return dc_replace(self, **arrays)

    # -- running integrals -------------------------------------------------

    def reset_integrals(self, lam: Optional[float] = None, eps: Optional[float] = None) -> None:
        """Restart both running integrals at the current clock."""
        if lam is not None:
            if lam < 0:
                raise ValueError("λ must be nonnegative")
            self.lam = float(lam)
        if eps is not None:
            if eps <= 0:
                raise ValueError("ε must be positive")
            self.eps = float(eps)
        t = self.clock
        self.state[K.TREF] = t
        self.state[K.GSUM] = K.rebuild_weights(self.N, self.left, self.right, self.height, self.size, self.wt, self.lam, t)
        self.state[K.SINT] = 0.0
        self.state[K.REMOVED] = 0.0
        self.state[K.ORIGIN] = t

    def pair_sum_integral(self) -> float:
        """``∫ Σ_{i≠j} e^{-λ d_ij(s)} ds`` since the origin."""
        return float(self.state[K.SINT])

    def ball_count_integral(self) -> float:
        """``∫ N_ε(s) ds`` since the origin."""
        t, origin = self.clock, float(self.state[K.ORIGIN])
        young = self.state[K.REMOVED] + K.ball_integral_present(self.N, self.height, t, origin, self.eps)
        return float(self.N * (t - origin) - young)

    # -- dynamics -----------------------------------------------------------

    def advance(self, dt: float, rng: np.random.Generator) -> Dict[str, int]:
        """Run the dynamics for ``dt`` time units; returns the events of this stretch."""
        if not dt > 0:
            raise ValueError("Δt must be positive")
        before = self.event_counts
        c = self.config
        K.advance(
            self.N, self.clock + float(dt), self.parent, self.left, self.right, self.height, self.size,
            self.wt, self.types, self.state, self.istate,
            self.lam, self.eps, c.theta, c.z, c.kernel_width, c.alpha, rng,
        )
        after = self.event_counts
        return {k: after[k] - before[k] for k in after}

    # -- functionals -------------------------------------------------------

    def distance_matrix(self) -> np.ndarray:
        return K.distance_matrix(self.N, self.root, self.left, self.right, self.height, self.clock)

    def n_eps(self, eps: float) -> int:
        """Number of blocks of ``{i ~ j iff d_ij < ε}``, read off the tree."""
        if eps <= 0:
            raise ValueError("ε must be positive")
        return int(K.count_balls(self.N, self.height, self.clock, float(eps)))

    def pair_sum(self, lam: float) -> float:
        return float(K.pair_sum(self.N, self.left, self.right, self.height, self.size, self.clock, float(lam)))

    def psi12(self, lam: float, diagonal: bool = True) -> float:
        """Sampling mean of ``e^{-λ d}`` over ordered pairs.

        ``diagonal=True`` averages all ``N²`` pairs including ``i = j``;
        otherwise the ``N(N-1)`` pairs of distinct individuals, whose
        stationary mean is exactly ``1/(λ+1)``.
        """
        if lam < 0:
            raise ValueError("λ must be nonnegative")
        N, s = self.N, self.pair_sum(lam)
        return (N + s) / N**2 if diagonal else s / (N * (N - 1))

    def psihat12(self, lam: float, diagonal: bool = True, dist: Optional[np.ndarray] = None) -> float:
        """As :meth:`psi12`, counting only pairs of equal type."""
        if lam < 0:
            raise ValueError("λ must be nonnegative")
        D = self.distance_matrix() if dist is None else dist
        s = _same_type_sum(D, self.types, lambda d: np.exp(-lam * d))
        N = self.N
        return (N + s) / N**2 if diagonal else s / (N * (N - 1))

    def mark_ratio(self, eps: float, dist: Optional[np.ndarray] = None) -> float:
        """Fraction of equal-type pairs among distinct pairs at distance below ε."""
        if eps <= 0:
            raise ValueError("ε must be positive")
        D = self.distance_matrix() if dist is None else dist
        close = D < eps
        np.fill_diagonal(close, False)
        total = int(close.sum())
        if total == 0:
            raise MarkRatioUndefined(f"no pair within distance {eps}")
        same = _same_type_sum(D, self.types, lambda d: (d < eps).astype(float))
        return same / total

    def laplace_mark_ratio(self, lam: float, dist: Optional[np.ndarray] = None) -> float:
        """``Σ_{i≠j} 1{same type} e^{-λ d_ij} / Σ_{i≠j} e^{-λ d_ij}``."""
        D = self.distance_matrix() if dist is None else dist
        same = _same_type_sum(D, self.types, lambda d: np.exp(-lam * d))
        return same / self.pair_sum(lam)

    def functionals(self, eps: Sequence[float] = (), lam: Sequence[float] = ()) -> Dict[str, float]:
        """All snapshot functionals at the requested radii and Laplace parameters."""
        D = self.distance_matrix()
        out: Dict[str, float] = {}
        for e in eps:
            out[f"n_eps[{e:g}]"] = self.n_eps(e)
            try:
                out[f"mark_ratio[{e:g}]"] = self.mark_ratio(e, D)
            except MarkRatioUndefined:
                out[f"mark_ratio[{e:g}]"] = float("nan")
        for l in lam:
            out[f"psi12[{l:g}]"] = self.psi12(l)
            out[f"psihat12[{l:g}]"] = self.psihat12(l, dist=D)
        return out


def _same_type_sum(D: np.ndarray, types: np.ndarray, weight) -> float:
    """``Σ_{i≠j, type_i = type_j} weight(d_ij)``, grouping individuals by type."""
    order = np.argsort(types, kind="stable")
    t_sorted = types[order]
    cuts = np.flatnonzero(np.diff(t_sorted)) + 1
    total = 0.0
    for block in np.split(order, cuts):
        if block.size > 1:
            sub = weight(D[np.ix_(block, block)])
            total += float(sub.sum() - np.trace(sub))
    return total


def _empty_state(N: int, config: MoranConfig) -> MoranState:
    m = 2 * N - 1
    return MoranState(
        N=N,
        config=config,
        parent=np.empty(m, np.int64),
        left=np.empty(m, np.int64),
        right=np.empty(m, np.int64),
        height=np.empty(m),
        size=np.empty(m, np.int64),
        wt=np.zeros(m),
        types=np.empty(N),
        state=np.zeros(6),
        istate=np.zeros(5, np.int64),
    )


def init(N: int, mode: str, rng: np.random.Generator, config: Optional[MoranConfig] = None) -> MoranState:
    """New population at clock 0.

    ``stationary``: genealogy from a Kingman tree on ``N`` leaves, types by
    mutating down that tree from a uniform root type (exact neutral
    equilibrium).  ``star``: all distances 0 and all types 1/2.
    """
    N = int(N)
    if not MIN_N <= N <= MAX_N:
        raise ValueError(f"N must lie in [{MIN_N}, {MAX_N}], got {N}")
    config = config or MoranConfig()
    st = _empty_state(N, config)
    if mode == "stationary":
        _, lm, rm, _, _, depth = kingman_merges(N, rng, 0.0)
        root = K.build_from_merges(N, lm, rm, depth, st.parent, st.left, st.right, st.height, st.size)
        K.types_along_tree(N, root, st.left, st.right, st.height, config.theta, config.z, config.kernel_width, st.types, rng)
    elif mode == "star":
        root = K.build_star(N, st.parent, st.left, st.right, st.height, st.size)
        st.types[:] = 0.5
    else:
        raise ValueError("mode must be 'stationary' or 'star'")
    st.istate[K.ROOT] = root
    st.reset_integrals()
    return st


# ---------------------------------------------------------------------------
# paths


BURN_IN = 10.0


@dataclass
class PathRecord:
    """Grid values of the integrated functionals along one path.

    ``pair_integral[k]`` and ``ball_integral[k]`` are ``∫_0^{t_k}`` of the
    distinct-pair sum ``Σ_{i≠j} e^{-λ d_ij}`` and of ``N_ε``; the
    integrals are exact between events, so they are additive over the grid.
    """

    N: int
    lam: float
    eps: float
    times: np.ndarray
    pair_integral: np.ndarray
    ball_integral: np.ndarray
    snapshots: Dict[str, np.ndarray] = field(default_factory=dict)
    events: Dict[str, int] = field(default_factory=dict)
    burn_in: float = 0.0


def simulate_path(
    N: int,
    times: Sequence[float],
    rng: np.random.Generator,
    lam: float = 0.0,
    eps: float = 0.02,
    config: Optional[MoranConfig] = None,
    snapshot_eps: Sequence[float] = (),
    snapshot_lam: Sequence[float] = (),
    burn_in: Optional[float] = None,
) -> PathRecord:
    """Stationary path observed on an increasing grid of times (measured after burn-in).

    Neutral runs start exactly in equilibrium; with selection the neutral
    equilibrium is run for ``burn_in`` (default 10) time units first.
    """
    config = config or MoranConfig()
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ValueError("time grid must be nonnegative and strictly increasing")
    if burn_in is None:
        burn_in = BURN_IN if config.alpha > 0 else 0.0
    st = init(N, "stationary", rng, config)
    if burn_in > 0:
        st.advance(burn_in, rng)
    st.reset_integrals(lam=lam, eps=eps)
    t0 = st.clock
    pair = np.empty(times.size)
    balls = np.empty(times.size)
    snaps: Dict[str, list] = {}
    for k, t in enumerate(times):
        if t > 0 and t0 + t > st.clock:
            st.advance(t0 + t - st.clock, rng)
        pair[k] = st.pair_sum_integral()
        balls[k] = st.ball_count_integral()
        if snapshot_eps or snapshot_lam:
            for key, val in st.functionals(snapshot_eps, snapshot_lam).items():
                snaps.setdefault(key, []).append(val)
    return PathRecord(
        N=N, lam=float(lam), eps=float(eps), times=times, pair_integral=pair, ball_integral=balls,
        snapshots={k: np.asarray(v) for k, v in snaps.items()}, events=st.event_counts, burn_in=burn_in,
    )


def w_lambda(path: PathRecord) -> np.ndarray:
    """``W_λ(t) = λ ∫_0^t ((λ+1) Ψ(s) - 1) ds`` with Ψ the distinct-pair mean of ``e^{-λ d}``.

    The distinct-pair mean has stationary expectation exactly ``1/(λ+1)``;
    including the diagonal would add a drift ``λ²/N``.
    """
    lam, N = path.lam, path.N
    if lam <= 0:
        raise ValueError("W needs λ > 0")
    mean_pair = path.pair_integral / (N * (N - 1))
    return lam * ((lam + 1) * mean_pair - path.times)


def pair_mean_variance(N: int, lam: float) -> float:
    """Exact stationary variance of the distinct-pair mean of ``e^{-λ d}`` in the ``N``-individual model.

    Any four distinct individuals have a Kingman genealogy, so the second
    moment splits into disjoint pairs, pairs sharing one individual and
    repeated pairs.
    """
    from fractions import Fraction

    from .basis import psi
    from .moments import equilibrium_value

    N = int(N)
    if N < 4:
        raise ValueError("N must be at least 4")
    b = {"λ": Fraction(lam).limit_denominator(10**12)}
    e34 = equilibrium_value(psi("12,34")).evaluate(b)
    e23 = equilibrium_value(psi("12,23")).evaluate(b)
    e11 = equilibrium_value(psi("12,12")).evaluate(b)
    second = ((N - 2) * (N - 3) * e34 + 4 * (N - 2) * e23 + 2 * e11) / (N * (N - 1))
    return float(second - 1 / (b["λ"] + 1) ** 2)


def w_lambda_variance(N: int, lam: float, t: float) -> float:
    """Exact ``Var[W_λ(t)]`` for the stationary ``N``-individual model.

    The distinct-pair mean ``U`` satisfies ``dE[U] = (1 - (λ+1) U) dt``, so
    its autocovariance is ``Var[U] e^{-(λ+1)|s|}``.
    """
    k = lam + 1.0
    v = pair_mean_variance(N, lam)
    return 2.0 * lam**2 * k**2 * v * (t / k - (1.0 - math.exp(-k * t)) / k**2)


def b_eps(path: PathRecord, centering: Optional[float] = None) -> np.ndarray:
    """``B_ε(t) = √(3/2) ∫_0^t (N_ε(s) - E[N_ε]) ds``.

    ``E[N_ε]`` defaults to the stationary mean for the ``N``-individual
    population (Tavaré series with the finite-population factor).
    """
    if centering is None:
        centering = tavare_mean_N_value(path.eps, n_lines=path.N)
    return math.sqrt(1.5) * (path.ball_integral - centering * path.times)


def run_paths(
    N: int,
    times: Sequence[float],
    reps: int,
    seed: int,
    lam: float = 0.0,
    eps: float = 0.02,
    config: Optional[MoranConfig] = None,
    stream: int = 10,
    **kwargs,
):
    """Yield ``(replicate, PathRecord)`` for independent replicates."""
    for r in range(reps):
        yield r, simulate_path(N, times, replicate_rng(seed, r, stream), lam=lam, eps=eps, config=config, **kwargs)
