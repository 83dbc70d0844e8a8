"""Inner loops of the Moran model with a binary-tree genealogy.

Node ids ``0..N-1`` are the living individuals (leaves); ``N..2N-2`` are
the internal nodes of the current genealogy.  ``height[v]`` is the clock
time at which internal node ``v`` was born, so the distance of two
individuals at time ``t`` is ``t - height[lca]``.  ``size[v]`` counts the
leaves below ``v``.

Per-node weights ``wt[v] = exp(λ (height[v] - t_ref))`` let the ordered
pair sum ``S(t) = Σ_{i≠j} e^{-λ d_ij} = e^{-λ (t - t_ref)} G`` with
``G = Σ_v 2 |L_v| |R_v| wt[v]`` be updated without evaluating exponentials
on every event.

``state`` (float64) holds: 0 clock, 1 t_ref, 2 G, 3 ∫S dt, 4 removed part of
∫#{v: t - h_v < ε} dt, 5 integration origin.  ``istate`` (int64) holds:
0 root, 1 neutral events, 2 mutations, 3 accepted selection events,
4 rejected selection proposals.
"""

import numpy as np

from .._jit import jit

CLOCK, TREF, GSUM, SINT, REMOVED, ORIGIN = 0, 1, 2, 3, 4, 5
ROOT, N_NEUTRAL, N_MUT, N_SEL, N_REJECT = 0, 1, 2, 3, 4
REBASE = 30.0


@jit
def build_from_merges(N, left_m, right_m, depth_m, parent, left, right, height, size):
    """Fill tree arrays from a coalescent merge list; leaves sit at time 0."""
    for v in range(2 * N - 1):
        parent[v] = -1
        left[v] = -1
        right[v] = -1
        height[v] = 0.0
        size[v] = 1
    for m in range(N - 1):
        v = N + m
        a = left_m[m]
        b = right_m[m]
        left[v] = a
        right[v] = b
        parent[a] = v
        parent[b] = v
        height[v] = -depth_m[m]
        size[v] = size[a] + size[b]
    return 2 * N - 2


@jit
def build_star(N, parent, left, right, height, size):
    """Caterpillar with every internal node at height 0: all distances vanish at time 0."""
    for v in range(2 * N - 1):
        parent[v] = -1
        left[v] = -1
        right[v] = -1
        height[v] = 0.0
        size[v] = 1
    prev = 0
    for m in range(N - 1):
        v = N + m
        left[v] = prev
        right[v] = m + 1
        parent[prev] = v
        parent[m + 1] = v
        size[v] = size[prev] + 1
        prev = v
    return prev


@jit
def mutate_type(a, z, width, rng):
    """One mutation: a fresh uniform type with probability z, else a reflected uniform step."""
    if rng.random() < z:
        return rng.random()
    b = a + width * (2.0 * rng.random() - 1.0)
    while b < 0.0 or b > 1.0:
        if b < 0.0:
            b = -b
        if b > 1.0:
            b = 2.0 - b
    return b


@jit
def types_along_tree(N, root, left, right, height, theta, z, width, types, rng):
    """Drop mutations on the branches of the tree, starting from a uniform root type."""
    node_type = np.empty(2 * N - 1)
    node_type[root] = rng.random()
    stack = np.empty(2 * N, np.int64)
    stack[0] = root
    top = 1
    while top > 0:
        top -= 1
        v = stack[top]
        for side in range(2):
            c = left[v] if side == 0 else right[v]
            h = height[c] if c >= N else 0.0
            k = rng.poisson(theta * (h - height[v])) if theta > 0.0 else 0
            a = node_type[v]
            for _ in range(k):
                a = mutate_type(a, z, width, rng)
            node_type[c] = a
            if c >= N:
                stack[top] = c
                top += 1
    for i in range(N):
        types[i] = node_type[i]


@jit
def rebuild_weights(N, left, right, height, size, wt, lam, t_ref):
    """Recompute node weights relative to ``t_ref`` and return the exact ``G``."""
    g = 0.0
    for v in range(N, 2 * N - 1):
        w = np.exp(lam * (height[v] - t_ref))
        wt[v] = w
        g += 2.0 * size[left[v]] * size[right[v]] * w
    return g


@jit
def replace(N, k, l, t, parent, left, right, height, size, wt, types, state, istate, lam, eps):
    """Offspring of ``k`` replaces ``l`` at time ``t`` (``k != l``)."""
    p = parent[l]
    s = right[p] if left[p] == l else left[p]
    g = parent[p]
    # bookkeeping for the node that disappears
    lo = max(height[p], state[ORIGIN])
    hi = min(t, height[p] + eps)
    if hi > lo:
        state[REMOVED] += hi - lo
    G = state[GSUM]
    G -= 2.0 * size[s] * wt[p]
    if g == -1:
        istate[ROOT] = s
        parent[s] = -1
    else:
        if left[g] == p:
            left[g] = s
        else:
            right[g] = s
        parent[s] = g
        c = s
        a = g
        while a != -1:
            o = right[a] if left[a] == c else left[a]
            G -= 2.0 * size[o] * wt[a]
            size[a] -= 1
            c = a
            a = parent[a]
    # reuse p as the new parent of k and l
    q = parent[k]
    u = p
    height[u] = t
    wt[u] = np.exp(lam * (t - state[TREF]))
    left[u] = k
    right[u] = l
    parent[k] = u
    parent[l] = u
    size[u] = 2
    G += 2.0 * wt[u]
    if q == -1:
        istate[ROOT] = u
        parent[u] = -1
    else:
        if left[q] == k:
            left[q] = u
        else:
            right[q] = u
        parent[u] = q
        c = u
        a = q
        while a != -1:
            o = right[a] if left[a] == c else left[a]
            G += 2.0 * size[o] * wt[a]
            size[a] += 1
            c = a
            a = parent[a]
    state[GSUM] = G
    types[l] = types[k]


@jit
def advance(
    N, t_end, parent, left, right, height, size, wt, types, state, istate,
    lam, eps, theta, z, width, alpha, rng,
):
    """Run events until the clock reaches ``t_end``, integrating ``S`` exactly.

    Rates: each unordered pair resamples at rate 1 (direction uniform); each
    individual mutates at rate ``theta``; each individual ``k`` reproduces
    selectively at rate ``alpha * types[k]`` onto a uniform other individual
    (proposals at rate ``alpha * N``, thinned by the fitness ``types[k] ≤ 1``).
    """
    r_neutral = 0.5 * N * (N - 1)
    r_mut = theta * N
    r_sel = alpha * N
    rate = r_neutral + r_mut + r_sel
    t = state[CLOCK]
    while True:
        dt = rng.standard_exponential() / rate
        t_next = t + dt
        if t_next > t_end:
            t_next = t_end
        # integrate S(s) = e^{-λ (s - t_ref)} G over [t, t_next]
        G = state[GSUM]
        e0 = np.exp(-lam * (t - state[TREF]))
        if lam > 0.0:
            state[SINT] += G * e0 * (1.0 - np.exp(-lam * (t_next - t))) / lam
        else:
            state[SINT] += G * (t_next - t)
        t = t_next
        state[CLOCK] = t
        if t >= t_end:
            break
        if lam * (t - state[TREF]) > REBASE:
            state[TREF] = t
            state[GSUM] = rebuild_weights(N, left, right, height, size, wt, lam, t)
        u = rng.random() * rate
        if u < r_neutral:
            k = int(rng.random() * N)
            l = int(rng.random() * (N - 1))
            if l >= k:
                l += 1
            replace(N, k, l, t, parent, left, right, height, size, wt, types, state, istate, lam, eps)
            istate[N_NEUTRAL] += 1
        elif u < r_neutral + r_mut:
            i = int(rng.random() * N)
            types[i] = mutate_type(types[i], z, width, rng)
            istate[N_MUT] += 1
        else:
            k = int(rng.random() * N)
            if rng.random() < types[k]:
                l = int(rng.random() * (N - 1))
                if l >= k:
                    l += 1
                replace(N, k, l, t, parent, left, right, height, size, wt, types, state, istate, lam, eps)
                istate[N_SEL] += 1
            else:
                istate[N_REJECT] += 1


@jit
def ball_integral_present(N, height, t, origin, eps):
    """Σ over current internal nodes of |[max(h, origin), min(t, h + ε))|."""
    total = 0.0
    for v in range(N, 2 * N - 1):
        lo = max(height[v], origin)
        hi = min(t, height[v] + eps)
        if hi > lo:
            total += hi - lo
    return total


@jit
def count_balls(N, height, t, eps):
    """Number of blocks of {d < ε}: N minus the internal nodes younger than ε."""
    young = 0
    for v in range(N, 2 * N - 1):
        if t - height[v] < eps:
            young += 1
    return N - young


@jit
def pair_sum(N, left, right, height, size, t, lam):
    """``Σ_{i≠j} e^{-λ d_ij}`` computed directly from the tree."""
    total = 0.0
    for v in range(N, 2 * N - 1):
        total += 2.0 * size[left[v]] * size[right[v]] * np.exp(-lam * (t - height[v]))
    return total


@jit
def distance_matrix(N, root, left, right, height, t):
    """Full matrix of pairwise distances (zero diagonal)."""
    D = np.zeros((N, N))
    order = np.empty(N, np.int64)
    start = np.empty(2 * N - 1, np.int64)
    stop = np.empty(2 * N - 1, np.int64)
    # iterative post-order: leaves get consecutive positions
    stack = np.empty(2 * (2 * N - 1), np.int64)
    stack[0] = root
    top = 1
    pos = 0
    while top > 0:
        top -= 1
        v = stack[top]
        if v >= 0:
            if v < N:
                order[pos] = v
                start[v] = pos
                pos += 1
                stop[v] = pos
            else:
                stack[top] = -v - 1
                top += 1
                stack[top] = right[v]
                top += 1
                stack[top] = left[v]
                top += 1
        else:
            v = -v - 1
            start[v] = start[left[v]]
            stop[v] = stop[right[v]]
    for v in range(N, 2 * N - 1):
        d = t - height[v]
        a, b = left[v], right[v]
        for x in range(start[a], stop[a]):
            i = order[x]
            for y in range(start[b], stop[b]):
                j = order[y]
                D[i, j] = d
                D[j, i] = d
    return D


@jit
def union_find_blocks(D, eps):
    """Number of blocks of the relation d_ij < ε, by union-find over all pairs."""
    n = D.shape[0]
    parent = np.arange(n)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    blocks = n
    for i in range(n):
        for j in range(i + 1, n):
            if D[i, j] < eps:
                a = find(i)
                b = find(j)
                if a != b:
                    parent[b] = a
                    blocks -= 1
    return blocks
