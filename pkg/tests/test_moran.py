import copy
import math

import numpy as np
import pytest

from fvtree import moran as mo
from fvtree._jit import python_version
from fvtree.kernels import moran as K
from fvtree.rng import replicate_rng


def single_linkage_heights(D):
    """Merge distances of single-linkage clustering (Prim's minimum spanning tree)."""
    n = D.shape[0]
    seen = np.zeros(n, bool)
    seen[0] = True
    best = D[0].copy()
    out = []
    for _ in range(n - 1):
        cand = np.where(seen, np.inf, best)
        j = int(np.argmin(cand))
        out.append(cand[j])
        seen[j] = True
        best = np.minimum(best, D[j])
    return np.array(out)


def naive_moran(D, types, t_end, rng, lam, eps, cfg):
    """O(N²) reference: explicit distance matrix, same random-number consumption as the tree kernel."""
    D, types = D.copy(), types.copy()
    N = D.shape[0]
    mutate = python_version(K.mutate_type)
    r_neutral, r_mut, r_sel = 0.5 * N * (N - 1), cfg.theta * N, cfg.alpha * N
    rate = r_neutral + r_mut + r_sel
    off = ~np.eye(N, dtype=bool)
    t, pair_int, ball_int = 0.0, 0.0, 0.0
    while True:
        dt = rng.standard_exponential() / rate
        step = min(dt, t_end - t)
        S = np.exp(-lam * D[off]).sum()
        pair_int += S * (1 - math.exp(-lam * step)) / lam if lam > 0 else S * step
        m = single_linkage_heights(D)
        ball_int += N * step - np.clip(eps - m, 0.0, step).sum()
        D[off] += step
        t += step
        if t >= t_end:
            return D, types, pair_int, ball_int
        u = rng.random() * rate
        if u < r_neutral:
            k = int(rng.random() * N)
            l = int(rng.random() * (N - 1))
            l += l >= k
        elif u < r_neutral + r_mut:
            i = int(rng.random() * N)
            types[i] = mutate(types[i], cfg.z, cfg.kernel_width, rng)
            continue
        else:
            k = int(rng.random() * N)
            if not rng.random() < types[k]:
                continue
            l = int(rng.random() * (N - 1))
            l += l >= k
        D[l, :] = D[k, :]
        D[:, l] = D[:, k]
        D[l, l] = D[k, l] = D[l, k] = 0.0
        types[l] = types[k]


@pytest.mark.parametrize(
    "cfg",
    [mo.MoranConfig(), mo.MoranConfig(theta=2.0, z=0.3), mo.MoranConfig(theta=1.0, alpha=3.0)],
)
def test_tree_kernel_matches_distance_matrix_oracle(cfg):
    N, lam, eps = 12, 3.0, 0.2
    rng = replicate_rng(21, 0)
    st = mo.init(N, "stationary", rng, cfg)
    st.reset_integrals(lam=lam, eps=eps)
    D0, types0 = st.distance_matrix(), st.types.copy()
    rng_ref = copy.deepcopy(rng)
    st.advance(1.5, rng)
    D, types, pair_int, ball_int = naive_moran(D0, types0, 1.5, rng_ref, lam, eps, cfg)
    np.testing.assert_allclose(st.distance_matrix(), D, atol=1e-12)
    np.testing.assert_array_equal(st.types, types)
    assert st.pair_sum_integral() == pytest.approx(pair_int, rel=1e-10)
    assert st.ball_count_integral() == pytest.approx(ball_int, rel=1e-10)
    assert st.pair_sum(lam) == pytest.approx(np.exp(-lam * D[~np.eye(N, dtype=bool)]).sum(), rel=1e-10)


def test_distance_matrix_is_ultrametric():
    st = mo.init(30, "stationary", replicate_rng(22))
    st.advance(0.7, replicate_rng(23))
    D = st.distance_matrix()
    assert np.allclose(D, D.T) and np.all(np.diag(D) == 0)
    assert np.all(D[:, :, None] <= np.maximum(D[:, None, :], D.T[None, :, :]) + 1e-12)


def test_ball_count_matches_union_find():
    st = mo.init(40, "stationary", replicate_rng(24))
    st.advance(0.3, replicate_rng(25))
    D = st.distance_matrix()
    for eps in (0.01, 0.1, 0.5):
        blocks = K.union_find_blocks(D, eps)
        assert st.n_eps(eps) == blocks
        assert st.n_eps(eps) == 40 - int(np.sum(single_linkage_heights(D) < eps))


def test_star_state():
    st = mo.init(10, "star", replicate_rng(26))
    assert st.n_eps(0.01) == 1
    assert st.psi12(5.0) == pytest.approx(1.0)
    assert st.mark_ratio(0.01) == 1.0
    assert np.all(st.distance_matrix() == 0)


def test_mark_ratio_undefined_when_no_close_pairs():
    st = mo.init(5, "star", replicate_rng(27))
    st.advance(5.0, replicate_rng(28))
    D = st.distance_matrix()
    eps = float(D[~np.eye(5, dtype=bool)].min()) * 0.5
    with pytest.raises(mo.MarkRatioUndefined):
        st.mark_ratio(eps)


def test_two_individuals_distance_is_unit_exponential():
    d = np.array([mo.init(2, "stationary", replicate_rng(29, r)).distance_matrix()[0, 1] for r in range(4000)])
    assert abs(d.mean() - 1) < 4 / math.sqrt(d.size)
    # after running, the pair distance is still Exp(1) (resampling at rate 1)
    e = []
    for r in range(2000):
        st = mo.init(2, "stationary", replicate_rng(30, r))
        st.advance(2.0, replicate_rng(31, r))
        e.append(st.distance_matrix()[0, 1])
    assert abs(np.mean(e) - 1) < 4 / math.sqrt(len(e))


def test_event_rates():
    N, theta, alpha = 20, 1.5, 2.0
    st = mo.init(N, "stationary", replicate_rng(32), mo.MoranConfig(theta=theta, alpha=alpha))
    T = 50.0
    ev = st.advance(T, replicate_rng(33))
    expected = {"neutral": N * (N - 1) / 2 * T, "mutation": theta * N * T, "proposals": alpha * N * T}
    assert abs(ev["neutral"] - expected["neutral"]) < 4 * math.sqrt(expected["neutral"])
    assert abs(ev["mutation"] - expected["mutation"]) < 4 * math.sqrt(expected["mutation"])
    proposals = ev["selection"] + ev["selection_rejected"]
    assert abs(proposals - expected["proposals"]) < 4 * math.sqrt(expected["proposals"])


def test_selection_favours_large_types():
    # with χ(a) = a, accepted selective births come from above-average types
    st = mo.init(50, "stationary", replicate_rng(34), mo.MoranConfig(theta=0.5, alpha=20.0))
    before = st.types.mean()
    st.advance(3.0, replicate_rng(35))
    assert st.types.mean() > before


def test_pair_sum_consistency_and_rebase():
    st = mo.init(25, "stationary", replicate_rng(36))
    st.reset_integrals(lam=40.0, eps=0.1)
    st.advance(2.0, replicate_rng(37))  # λt = 80 forces rebasing
    D = st.distance_matrix()
    off = ~np.eye(25, dtype=bool)
    assert st.pair_sum(40.0) == pytest.approx(np.exp(-40.0 * D[off]).sum(), rel=1e-9)
    G = st.state[K.GSUM] * math.exp(-40.0 * (st.clock - st.state[K.TREF]))
    assert G == pytest.approx(st.pair_sum(40.0), rel=1e-9)


def test_psi_variants():
    st = mo.init(15, "stationary", replicate_rng(38), mo.MoranConfig(theta=1.0))
    D = st.distance_matrix()
    full, off = st.psi12(2.0), st.psi12(2.0, diagonal=False)
    assert full == pytest.approx((15 + off * 15 * 14) / 225)
    same = st.types[:, None] == st.types[None, :]
    expected = (np.exp(-2.0 * D) * same).sum() / 225
    assert st.psihat12(2.0) == pytest.approx(expected)
    assert st.laplace_mark_ratio(2.0) <= 1.0


def test_stationary_pair_mean_is_exact():
    lam = 4.0
    vals = [mo.init(20, "stationary", replicate_rng(39, r)).psi12(lam, diagonal=False) for r in range(4000)]
    assert abs(np.mean(vals) - 1 / (lam + 1)) < 4 * np.std(vals) / math.sqrt(len(vals))
    assert np.var(vals) == pytest.approx(mo.pair_mean_variance(20, lam), rel=0.1)


def test_w_variance_matches_exact_formula():
    N, lam, t = 30, 5.0, 1.0
    W = np.array([mo.w_lambda(p)[-1] for _, p in mo.run_paths(N, [t], 600, seed=40, lam=lam)])
    target = mo.w_lambda_variance(N, lam, t)
    se = target * math.sqrt(2 / (W.size - 1))
    assert abs(W.var(ddof=1) - target) < 4 * se
    assert abs(W.mean()) < 4 * math.sqrt(target / W.size)


def test_b_centering_uses_finite_population_mean():
    N, eps = 30, 0.1
    B = np.array([mo.b_eps(p)[-1] for _, p in mo.run_paths(N, [1.0], 300, seed=41, eps=eps)])
    assert abs(B.mean()) < 4 * B.std() / math.sqrt(B.size)


def test_path_grid_and_validation():
    rec = mo.simulate_path(10, [0.5, 1.0], replicate_rng(42), lam=1.0)
    assert rec.pair_integral.shape == (2,) and rec.pair_integral[1] > rec.pair_integral[0]
    with pytest.raises(ValueError):
        mo.simulate_path(10, [1.0, 0.5], replicate_rng(42))
    with pytest.raises(ValueError):
        mo.init(1, "stationary", replicate_rng(0))
    with pytest.raises(ValueError):
        mo.init(10, "bogus", replicate_rng(0))
    with pytest.raises(ValueError):
        mo.MoranConfig(z=1.5)
    with pytest.raises(ValueError):
        mo.MoranConfig(chi="square")


def test_copy_is_independent():
    st = mo.init(10, "stationary", replicate_rng(43))
    c = st.copy()
    st.advance(1.0, replicate_rng(44))
    assert c.clock == 0.0 and st.clock == pytest.approx(1.0)
