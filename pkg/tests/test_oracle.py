import numpy as np
import pytest

from qmd.copulas import REFERENCE_COPULAS, c_cube, product, reference_copula, sample_scenario
from qmd.empirical import ranks
from qmd.measure import d1, zeta1_exact
from qmd.oracle import (checkerboard_cdf, empirical_copula_cdf, mc_d1, quadrature_zeta1,
                        riemann_d1_to_product)
from helpers import random_linkage


def test_riemann_cube_all_M():
    for M in range(1, 101):
        value, bound = riemann_d1_to_product(c_cube(2), M)
        assert bound == 2 / M
        assert abs(value - 0.25) <= bound


def test_riemann_product_and_convergence():
    for M in (1, 7, 50):
        value, bound = riemann_d1_to_product(product(3, 4), M)
        assert value <= bound and value < 1e-15
    cb = reference_copula("minimum", 7)
    errs = [abs(riemann_d1_to_product(cb, M)[0] - zeta1_exact(cb) / 3) for M in (10, 100, 1000, 10000)]
    assert errs[-1] < 1e-4
    assert all(e <= 2 / M for e, M in zip(errs, (10, 100, 1000, 10000)))


def test_riemann_errors():
    with pytest.raises(ValueError):
        riemann_d1_to_product(c_cube(2), 0)


@pytest.mark.parametrize("name", sorted(REFERENCE_COPULAS))
def test_riemann_bound_catalog(name):
    for N in (2, 3, 5, 8):
        cb = reference_copula(name, N)
        for M in (1, 3, 10, 64, 333):
            value, bound = riemann_d1_to_product(cb, M)
            assert abs(value - zeta1_exact(cb) / 3) <= bound


def test_mc_d1():
    cb = c_cube(2)
    mean, se = mc_d1(cb, cb, 1000, seed=0)
    assert mean == 0 and se == 0
    mean, se = mc_d1(cb, product(3, 2), 200000, seed=1)
    assert abs(mean - 0.25) <= 4 * se
    _, se_small = mc_d1(cb, product(3, 2), 10000, seed=2)
    _, se_big = mc_d1(cb, product(3, 2), 160000, seed=2)
    assert 3.0 < se_small / se_big < 5.0


def test_mc_d1_coverage():
    rng = np.random.default_rng(42)
    a, b = random_linkage(rng, 2, 4), random_linkage(rng, 2, 3)
    exact = d1(a, b).value
    hits = 0
    for rep in range(100):
        mean, se = mc_d1(a, b, 2000, seed=rep)
        hits += abs(mean - exact) <= 1.96 * se
    assert hits >= 90


def test_quadrature_uses_response_axis():
    cb = reference_copula("c_cube_tilde", 3)
    assert abs(quadrature_zeta1(cb, 1e-4, response_axis=0) - zeta1_exact(cb, 0)) < 1e-6


def test_empirical_copula_cdf_grounding():
    p = ranks(sample_scenario("noisy_chain", 30, 0))
    assert empirical_copula_cdf(p, np.ones(4), exact=True) == 1
    assert empirical_copula_cdf(p, [0.3, 0.0, 0.9, 0.5]) == 0
    assert abs(float(empirical_copula_cdf(p, [0.3, 0.6, 0.9, 0.5], exact=True))
               - empirical_copula_cdf(p, [0.3, 0.6, 0.9, 0.5])) < 1e-15
    with pytest.raises(ValueError):
        empirical_copula_cdf(p, [0.5, 0.5])
    with pytest.raises(ValueError):
        empirical_copula_cdf(p, [0.5, 0.5, 0.5, 1.5])


def test_checkerboard_cdf():
    cb = c_cube(2)
    assert checkerboard_cdf(cb, [[1, 1, 1]])[0] == pytest.approx(1.0)
    assert checkerboard_cdf(cb, [[0.5, 0.5, 0.5]])[0] == pytest.approx(0.25)
    assert checkerboard_cdf(product(3, 3), [[0.2, 0.5, 0.7]])[0] == pytest.approx(0.07)
