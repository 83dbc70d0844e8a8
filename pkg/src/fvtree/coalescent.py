"""Monte Carlo sampling of Kingman coalescent trees near their leaves.

Distances are single-counted: the distance of two leaves is the depth of
their most recent common ancestor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Sequence

import mpmath
import numpy as np

from .kernels.coalescent import kingman_merges, lines_at_depth, pair_laplace_sum, pairs_within
from .rng import replicate_rng

MAX_LINES = 10**6
DEFAULT_X_GRID = np.round(np.arange(0.1, 4.01, 0.1), 10)


class SaturationError(RuntimeError):
    """More than ``n0`` lines would be needed at the requested depth."""


@dataclass(frozen=True)
class CoalescentTree:
    """Merge schedule of a Kingman tree started from ``n0`` lines.

    ``level_times[n]`` is the depth at which ``n`` lines remain (entry 0 is
    unused).  Merge ``m`` creates node ``n0 + m`` from ``left[m]`` and
    ``right[m]`` at depth ``depth[m]``; the merged clades hold ``size_a[m]``
    and ``size_b[m]`` of the starting lines.
    """

    n0: int
    level_times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    size_a: np.ndarray
    size_b: np.ndarray
    depth: np.ndarray

    @property
    def start_lines(self) -> int:
        return self.n0

    def clade_sizes(self, n: int) -> np.ndarray:
        """Sizes of the ``n`` clades present while ``n`` lines remain."""
        if not 1 <= n <= self.n0:
            raise ValueError("level out of range")
        sizes = {i: 1 for i in range(self.n0)}
        for m in range(self.n0 - n):
            a, b = int(self.left[m]), int(self.right[m])
            sizes[self.n0 + m] = sizes.pop(a) + sizes.pop(b)
        return np.array(sorted(sizes.values(), reverse=True))


@lru_cache(maxsize=256)
def tail_depth_moments(n0: int):
    """Mean and variance of the depth at which ``n0`` lines remain in the infinite coalescent."""
    with mpmath.workdps(40):
        var = 4 * (mpmath.psi(1, n0) + mpmath.psi(1, n0 + 1) - mpmath.mpf(2) / n0)
        return 2.0 / n0, float(var)


def _tail_draw(n0: int, rng: np.random.Generator) -> float:
    # moment-matched gamma stand-in for Σ_{i>n0} S_i / C(i,2)
    mean, var = tail_depth_moments(n0)
    return float(rng.gamma(mean * mean / var, var / mean))


def sample_tree(n0: int, rng: np.random.Generator, infinite: bool = False) -> CoalescentTree:
    """Kingman tree on ``n0`` lines.

    By default the ``n0`` lines are leaves at depth 0.  With
    ``infinite=True`` they are the lines of the infinite coalescent, so the
    start depth is drawn from a gamma law matching the mean and variance of
    the time the infinite coalescent needs to come down to ``n0`` lines.
    """
    n0 = int(n0)
    if not 2 <= n0 <= MAX_LINES:
        raise ValueError(f"n0 must lie in [2, {MAX_LINES}], got {n0}")
    t0 = _tail_draw(n0, rng) if infinite else 0.0
    level, left, right, size_a, size_b, depth = kingman_merges(n0, rng, t0)
    return CoalescentTree(n0, level, left, right, size_a, size_b, depth)


def recommended_n0(eps: float) -> int:
    return max(200, 20 * math.ceil(2.0 / eps))


@dataclass(frozen=True)
class SliceSample:
    """Ancestral lines at depth ε and the masses of their families."""

    eps: float
    N: int
    F: np.ndarray
    saturated: bool = False


def sample_slice(
    eps: float,
    rng: np.random.Generator,
    n0: Optional[int] = None,
    strict: bool = True,
) -> SliceSample:
    """Number of ε-balls and their masses for the infinite coalescent.

    Levels are generated from ``n0`` lines (started at a gamma-distributed
    depth, see :func:`sample_tree`).  If the start depth already exceeds ε
    the count is saturated: ``strict`` raises, otherwise the sample is
    returned flagged with ``N = n0``.  Given ``N``, the family masses are
    uniform spacings, sampled as normalized unit exponentials.
    """
    if not eps > 0:
        raise ValueError("ε must be positive")
    n0 = recommended_n0(eps) if n0 is None else int(n0)
    if not 2 <= n0 <= MAX_LINES:
        raise ValueError(f"n0 must lie in [2, {MAX_LINES}], got {n0}")
    t0 = _tail_draw(n0, rng)
    N, saturated = lines_at_depth(float(eps), n0, rng, t0)
    if saturated and strict:
        raise SaturationError(f"{n0} starting lines do not reach depth {eps}; raise n0")
    w = rng.standard_exponential(N)
    return SliceSample(float(eps), int(N), w / w.sum(), bool(saturated))


@dataclass(frozen=True)
class SliceStatistics:
    eps_n: float
    sum_f2_over_eps: float
    kth_moment_sums: Dict[int, float]
    ecdf_grid: np.ndarray
    x_grid: np.ndarray = field(repr=False)


def slice_statistics(sample: SliceSample, x_grid: Sequence[float] = DEFAULT_X_GRID) -> SliceStatistics:
    """Scaled counts and power sums of one slice, plus the empirical CDF of F_i/ε on ``x_grid``."""
    F, eps = sample.F, sample.eps
    x_grid = np.asarray(x_grid, dtype=float)
    sums = {k: float(np.sum(F ** k) / eps ** (k - 1)) for k in (2, 3, 4)}
    scaled = np.sort(F / eps)
    ecdf = np.searchsorted(scaled, x_grid, side="right") / F.size
    return SliceStatistics(eps * sample.N, sums[2], sums, ecdf, x_grid)


def laplace_psi12(tree: CoalescentTree, lam: float, diagonal: bool = True) -> float:
    """Mean of ``e^{-λ d}`` over pairs of the ``n0`` leaves.

    With ``diagonal=True`` all ordered pairs including ``i = j`` are averaged,
    ``(n0 + Σ_v 2|A_v||B_v| e^{-λ depth_v}) / n0²``; otherwise only pairs of
    distinct leaves, whose mean is exactly ``1/(λ+1)`` under the coalescent.
    """
    if lam < 0:
        raise ValueError("λ must be nonnegative")
    n = tree.n0
    s = pair_laplace_sum(tree.size_a, tree.size_b, tree.depth, float(lam))
    if diagonal:
        return (n + s) / (n * n)
    return s / (n * (n - 1))


def fraction_pairs_within(tree: CoalescentTree, eps: float, diagonal: bool = False) -> float:
    n = tree.n0
    s = pairs_within(tree.size_a, tree.size_b, tree.depth, float(eps))
    if diagonal:
        return (n + s) / (n * n)
    return s / (n * (n - 1))


def z_profile(tree: CoalescentTree, lam: float, t_grid: Sequence[float], diagonal: bool = False) -> np.ndarray:
    """``Z_t = √λ ((λt+1) Ψ_{λt} - 1)`` for each ``t`` in the grid.

    Distinct-leaf pairs are used by default; the diagonal term would add a
    bias of order ``λ^{3/2} t / n0``.
    """
    if lam <= 0:
        raise ValueError("λ must be positive")
    out = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        if t <= 0:
            raise ValueError("time grid must be positive")
        mu = lam * t
        out[i] = math.sqrt(lam) * ((mu + 1) * laplace_psi12(tree, mu, diagonal) - 1)
    return out


# ---------------------------------------------------------------------------
# replicate drivers


def run_slices(eps: float, reps: int, seed: int, n0: Optional[int] = None, stream: int = 1):
    """Yield ``(replicate, SliceSample)`` for independent replicates."""
    for r in range(reps):
        yield r, sample_slice(eps, replicate_rng(seed, r, stream), n0=n0)


def run_z_profiles(lam: float, t_grid: Sequence[float], reps: int, seed: int, n0: int = 2000, stream: int = 2) -> np.ndarray:
    out = np.empty((reps, len(t_grid)))
    for r in range(reps):
        tree = sample_tree(n0, replicate_rng(seed, r, stream))
        out[r] = z_profile(tree, lam, t_grid)
    return out


def run_level_times(levels: Sequence[int], reps: int, seed: int, n0: int = 1000, stream: int = 3) -> np.ndarray:
    """Depths ``T_n`` for the requested ``n`` of the infinite coalescent, one row per replicate."""
    out = np.empty((reps, len(levels)))
    for r in range(reps):
        rng = replicate_rng(seed, r, stream)
        t0 = _tail_draw(n0, rng)
        level = kingman_merges(n0, rng, t0)[0]
        out[r] = [level[n] for n in levels]
    return out
