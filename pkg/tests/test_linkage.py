import numpy as np
import pytest
from scipy import stats

from qmd.copulas import c_cube, c_cube_tilde, minimum, product, sample_scenario
from qmd.core import Sample, marginalize
from qmd.empirical import empirical_checkerboard, ranks
from qmd.linkage import (ConditionalChain, linkage_checkerboard,
                         linkage_conditionally_independent, linkage_monte_carlo,
                         linkage_of_empirical, rosenblatt_forward, rosenblatt_inverse,
                         sample_checkerboard)
from qmd.measure import d1, is_linkage, zeta1_estimate, zeta1_exact
from helpers import random_copula, random_linkage


def test_conditionally_independent_examples():
    out = linkage_conditionally_independent(product(2, 2), 2)
    assert np.array_equal(out.to_dense(), product(3, 2).to_dense())
    lift = linkage_conditionally_independent(minimum(3), 2, 0)
    assert is_linkage(lift)
    assert zeta1_exact(lift) == zeta1_exact(minimum(3))
    assert np.array_equal(marginalize(lift, [1, 2]).to_dense(), product(2, 3).to_dense())
    other = linkage_conditionally_independent(minimum(3), 3, 2)
    assert np.array_equal(marginalize(other, [2, 3]).to_dense(), minimum(3).to_dense())
    with pytest.raises(ValueError):
        linkage_conditionally_independent(minimum(3), 2, 2)
    with pytest.raises(ValueError):
        linkage_conditionally_independent(c_cube(2), 2)


def test_linkage_of_empirical():
    s = sample_scenario("mod_sum3", 800, 1)
    p = ranks(s)
    N = 6
    out = linkage_of_empirical(p, N)
    biv = empirical_checkerboard(p.select([0, 3]), N)
    assert is_linkage(out)
    assert zeta1_exact(out) == zeta1_exact(biv)
    rest = marginalize(out, [1, 2, 3])
    assert np.array_equal(rest.to_dense(), product(3, N).to_dense())


def test_linkage_of_independent_sample_near_product():
    p = ranks(sample_scenario("indep_normal_exp", 20000, 3))
    out = linkage_of_empirical(p, 4)
    assert d1(out, product(3, 4)).value < 0.01


def test_forward_inverse_product_identity():
    rng = np.random.default_rng(0)
    x = rng.random((100, 3))
    assert np.allclose(rosenblatt_forward(product(3, 5), x, rng.random((100, 3))), x, atol=1e-15)
    assert np.allclose(rosenblatt_inverse(product(3, 5), x), x, atol=1e-15)


def test_forward_uniformizes():
    rng = np.random.default_rng(1)
    cb = random_copula(rng, 3, 4)
    z = sample_checkerboard(cb, 50000, seed=2)
    u = rosenblatt_forward(cb, z, rng.random(z.shape))
    for a in range(3):
        assert stats.kstest(u[:, a], "uniform").pvalue > 0.001
    # joint uniformity on a coarse grid
    counts = np.histogramdd(u, bins=4, range=[(0, 1)] * 3)[0].ravel()
    assert stats.chisquare(counts).pvalue > 0.001


def test_round_trip():
    rng = np.random.default_rng(4)
    cb = random_copula(rng, 3, 5)
    chain = ConditionalChain(cb)
    u = 1.0 - rng.random((10**5, 3))
    z = rosenblatt_inverse(cb, u, chain=chain)
    back = rosenblatt_inverse(cb, rosenblatt_forward(cb, z, chain=chain), chain=chain)
    assert np.max(np.abs(back - z)) <= 1e-12


def test_pushforward_matches_masses():
    cb = c_cube(4)
    n = 10**5
    z = sample_checkerboard(cb, n, seed=7)
    keys = np.ravel_multi_index(tuple(np.minimum((z * 4).astype(int), 3).T), (4, 4, 4))
    freq = np.bincount(keys, minlength=64)
    p = cb.to_dense().ravel()
    sigma = np.sqrt(n * p * (1 - p))
    z_scores = np.abs(freq - n * p)[p > 0] / sigma[p > 0]
    assert np.all(freq[p == 0] == 0)
    assert z_scores.max() <= 4.0
    assert stats.chisquare(freq[p > 0], n * p[p > 0]).pvalue > 0.001


def test_sampling_reestimate_cube():
    s = sample_checkerboard(c_cube(2), 10**5, seed=3)
    est = zeta1_estimate(Sample(s, ("X1", "X2", "Y"), 2), s=1 / 3)
    assert abs(est.value - 0.75) < 0.05


def test_linkage_identity_on_linkages():
    rng = np.random.default_rng(6)
    for cb in (c_cube(3), product(3, 4), random_linkage(rng, 2, 5), random_linkage(rng, 3, 3)):
        out = linkage_checkerboard(cb)
        assert np.allclose(out.to_dense(), cb.to_dense(), atol=1e-15)


def test_linkage_checkerboard_vs_monte_carlo():
    rng = np.random.default_rng(10)
    cb = random_copula(rng, 3, 3)
    exact = linkage_checkerboard(cb, 6)
    assert is_linkage(exact)
    draws = 400000
    mc = linkage_monte_carlo(cb, draws, seed=1, resolution=6)
    p = exact.to_dense()
    sigma = np.sqrt(p * (1 - p) / draws) + 1e-12
    assert np.max(np.abs(mc - p) / sigma) < 5.0
    # response margin untouched
    assert np.allclose(marginalize(exact, [2]).mass, 1 / 6)


def test_linkage_moves_response_axis():
    cb = c_cube_tilde(3)
    a = linkage_checkerboard(cb, response_axis=0)
    assert is_linkage(a)
    assert zeta1_exact(a) == pytest.approx(zeta1_exact(cb, response_axis=0), abs=1e-12)


def test_rosenblatt_argument_checks():
    with pytest.raises(ValueError):
        rosenblatt_forward(product(2, 2), [0.5, 1.5])
    with pytest.raises(ValueError):
        rosenblatt_forward(product(2, 2), [0.5, 0.5], r=[2.0, 0.0])
    with pytest.raises(ValueError):
        rosenblatt_inverse(product(2, 2), [0.5, 0.5, 0.5])
    assert rosenblatt_inverse(product(2, 2), [0.25, 0.75]).shape == (2,)
