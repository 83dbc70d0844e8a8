"""Inner loops of the Kingman coalescent sampler."""

import numpy as np

from .._jit import jit


@jit
def kingman_merges(n0, rng, t_start):
    """Simulate a Kingman tree from ``n0`` lines upward.

    Returns ``(level, left, right, size_a, size_b, depth)``: ``level[n]`` is
    the depth at which ``n`` lines remain (``level[n0] = t_start``); merge
    ``m`` joins clades ``left[m]`` and ``right[m]`` (node ids below ``n0``
    are leaves, merge ``m`` creates node ``n0 + m``) of sizes ``size_a[m]``
    and ``size_b[m]`` at depth ``depth[m]``.
    """
    level = np.zeros(n0 + 1)
    m = n0 - 1
    left = np.empty(m, np.int64)
    right = np.empty(m, np.int64)
    size_a = np.empty(m, np.int64)
    size_b = np.empty(m, np.int64)
    depth = np.empty(m)
    active = np.arange(n0)
    sizes = np.ones(n0, np.int64)
    t = t_start
    level[n0] = t
    for k in range(n0, 1, -1):
        t += rng.standard_exponential() / (0.5 * k * (k - 1))
        level[k - 1] = t
        i = int(rng.random() * k)
        j = int(rng.random() * (k - 1))
        if j >= i:
            j += 1
        idx = n0 - k
        left[idx] = active[i]
        right[idx] = active[j]
        size_a[idx] = sizes[i]
        size_b[idx] = sizes[j]
        depth[idx] = t
        active[i] = n0 + idx
        sizes[i] += sizes[j]
        active[j] = active[k - 1]
        sizes[j] = sizes[k - 1]
    return level, left, right, size_a, size_b, depth


@jit
def lines_at_depth(eps, n0, rng, t_start):
    """Number of lines at depth ``eps`` and a saturation flag.

    Levels are generated from ``n0`` lines (at depth ``t_start``) upward
    until the depth first reaches ``eps``.
    """
    t = t_start
    if t >= eps:
        return n0, True
    for k in range(n0, 1, -1):
        t += rng.standard_exponential() / (0.5 * k * (k - 1))
        if t >= eps:
            return k - 1, False
    return 1, False


@jit
def pair_laplace_sum(size_a, size_b, depth, lam):
    """``Σ_v 2|A_v||B_v| e^{-λ depth_v}``: ordered leaf pairs weighted by e^{-λ d}."""
    total = 0.0
    for m in range(depth.shape[0]):
        total += 2.0 * size_a[m] * size_b[m] * np.exp(-lam * depth[m])
    return total


@jit
def pairs_within(size_a, size_b, depth, eps):
    """Number of ordered leaf pairs at distance below ``eps``."""
    total = 0.0
    for m in range(depth.shape[0]):
        if depth[m] < eps:
            total += 2.0 * size_a[m] * size_b[m]
    return total
