import math

import numpy as np
import pytest

from fvtree import coalescent as co
from fvtree._jit import HAS_NUMBA, python_version
from fvtree.kernels.coalescent import kingman_merges, lines_at_depth, pair_laplace_sum, pairs_within
from fvtree.rng import check_seed, replicate_rng


def test_rng_streams_are_reproducible_and_distinct():
    a = replicate_rng(7, 3, 1).random(5)
    assert np.array_equal(a, replicate_rng(7, 3, 1).random(5))
    assert not np.array_equal(a, replicate_rng(7, 4, 1).random(5))
    assert not np.array_equal(a, replicate_rng(7, 3, 2).random(5))
    with pytest.raises(ValueError):
        check_seed(-1)
    with pytest.raises(ValueError):
        check_seed(2**64)


@pytest.mark.skipif(not HAS_NUMBA, reason="numba backend not active")
def test_backends_agree_bit_for_bit():
    for n0 in (2, 17, 300):
        fast = kingman_merges(n0, replicate_rng(1, n0), 0.25)
        slow = python_version(kingman_merges)(n0, replicate_rng(1, n0), 0.25)
        for x, y in zip(fast, slow):
            assert np.array_equal(x, y)
    assert lines_at_depth(0.01, 500, replicate_rng(2), 0.0) == python_version(lines_at_depth)(0.01, 500, replicate_rng(2), 0.0)
    tree = co.sample_tree(200, replicate_rng(3))
    args = (tree.size_a, tree.size_b, tree.depth)
    assert pair_laplace_sum(*args, 5.0) == pytest.approx(python_version(pair_laplace_sum)(*args, 5.0), rel=1e-14)
    assert pairs_within(*args, 0.1) == python_version(pairs_within)(*args, 0.1)


def test_tree_structure():
    tree = co.sample_tree(50, replicate_rng(4))
    assert tree.depth.shape == (49,)
    assert np.all(np.diff(tree.depth) > 0)
    assert tree.size_a[-1] + tree.size_b[-1] == 50
    # every pair of leaves is counted once
    assert pairs_within(tree.size_a, tree.size_b, tree.depth, np.inf) == 50 * 49
    assert list(tree.clade_sizes(1)) == [50]
    assert tree.clade_sizes(50).sum() == 50
    assert tree.level_times[50] == 0.0


def test_two_leaf_depth_is_unit_exponential():
    d = np.array([co.sample_tree(2, replicate_rng(5, r)).depth[0] for r in range(20000)])
    assert abs(d.mean() - 1) < 4 / math.sqrt(d.size)
    assert abs(np.mean(d > 1) - math.exp(-1)) < 0.015


def test_distinct_pair_laplace_is_unbiased():
    mu = 3.0
    x = np.array([(mu + 1) * co.laplace_psi12(co.sample_tree(30, replicate_rng(6, r)), mu, diagonal=False) for r in range(5000)])
    assert abs(x.mean() - 1) < 4 * x.std() / math.sqrt(x.size)


def test_diagonal_and_distinct_pair_means():
    tree = co.sample_tree(40, replicate_rng(8))
    full = co.laplace_psi12(tree, 2.0, diagonal=True)
    off = co.laplace_psi12(tree, 2.0, diagonal=False)
    assert full == pytest.approx((40 + off * 40 * 39) / 1600)
    assert co.laplace_psi12(tree, 0.0, diagonal=False) == pytest.approx(1.0)


def test_level_times_match_exact_moments():
    T = co.run_level_times([5, 20], 4000, seed=9, n0=400)
    assert abs(T[:, 0].mean() - 0.4) < 4 * T[:, 0].std() / math.sqrt(4000)
    assert abs(T[:, 1].mean() - 0.1) < 4 * T[:, 1].std() / math.sqrt(4000)


def test_tail_depth_moments():
    mean, var = co.tail_depth_moments(1000)
    assert mean == pytest.approx(0.002)
    direct = math.fsum(4 / (i * (i - 1)) ** 2 for i in range(1001, 2_000_000))
    assert var == pytest.approx(direct, rel=1e-5)


def test_slice_masses_sum_to_one():
    s = co.sample_slice(0.05, replicate_rng(10))
    assert s.F.size == s.N
    assert s.F.sum() == pytest.approx(1.0)
    st = co.slice_statistics(s)
    assert st.eps_n == pytest.approx(0.05 * s.N)
    assert st.sum_f2_over_eps == st.kth_moment_sums[2]


def test_slice_saturation():
    with pytest.raises(co.SaturationError):
        co.sample_slice(1e-6, replicate_rng(11), n0=10)
    s = co.sample_slice(1e-6, replicate_rng(11), n0=10, strict=False)
    assert s.saturated and s.N == 10


def test_run_slices_prefix_property():
    a = [s.N for _, s in co.run_slices(0.1, 5, seed=12)]
    b = [s.N for _, s in co.run_slices(0.1, 3, seed=12)]
    assert a[:3] == b


def test_z_profile_validates():
    tree = co.sample_tree(20, replicate_rng(13))
    with pytest.raises(ValueError):
        co.z_profile(tree, 0.0, [1.0])
    with pytest.raises(ValueError):
        co.z_profile(tree, 10.0, [0.0])
    z = co.z_profile(tree, 10.0, [0.5, 1.0])
    assert z.shape == (2,)


def test_sample_tree_bounds():
    with pytest.raises(ValueError):
        co.sample_tree(1, replicate_rng(0))
