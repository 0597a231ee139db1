"""Reference checkerboard copulas and the simulation scenarios."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .core import CheckerboardCopula, Sample

__all__ = ["product", "minimum", "w_copula", "c_cube", "c_cube_tilde",
           "REFERENCE_COPULAS", "reference_copula", "SCENARIOS", "sample_scenario",
           "sample_marshall_olkin", "rng_for"]


def rng_for(seed: Optional[int], stream: int = 0) -> np.random.Generator:
    """Independent generator for task ``stream`` under ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))


def product(rho: int, N: int) -> CheckerboardCopula:
    """Checkerboard of the independence copula: every cell carries ``N**-rho``."""
    if rho < 1 or N < 1:
        raise ValueError("rho and N must be positive")
    size = N ** rho
    return CheckerboardCopula(rho, N, np.arange(size), np.ones(size, dtype=np.int64), size)


def minimum(N: int) -> CheckerboardCopula:
    """Bivariate checkerboard of the upper Frechet bound (diagonal cells)."""
    i = np.arange(N)
    return CheckerboardCopula(2, N, i * N + i, np.ones(N, dtype=np.int64), N)


def w_copula(N: int) -> CheckerboardCopula:
    """Bivariate checkerboard of the lower Frechet bound (anti-diagonal cells)."""
    i = np.arange(N)
    keys = i * N + (N - 1 - i)
    order = np.argsort(keys)
    return CheckerboardCopula(2, N, keys[order], np.ones(N, dtype=np.int64), N)


def _cube(N, third):
    if N < 2:
        raise ValueError("cube constructions need N >= 2")
    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    k = third(i, j)
    keys = np.sort(((i * N + j) * N + k).ravel())
    return CheckerboardCopula(3, N, keys, np.ones(N * N, dtype=np.int64), N * N)


def c_cube(N: int) -> CheckerboardCopula:
    """Uniform mass on the ``N**2`` cells ``(i, j, (i + j) mod N)`` (zero-based).

    All bivariate margins are uniform while the response is nearly a
    function of the two predictors.
    """
    return _cube(N, lambda i, j: (i + j) % N)


def c_cube_tilde(N: int) -> CheckerboardCopula:
    """Uniform mass on the cells ``(i, j, i)``: the response follows the first axis."""
    return _cube(N, lambda i, j: i)


def _product_named(N, dimension=3):
    return product(dimension, N)


REFERENCE_COPULAS = {
    "product": _product_named,
    "minimum": lambda N, dimension=2: minimum(N),
    "w": lambda N, dimension=2: w_copula(N),
    "c_cube": lambda N, dimension=3: c_cube(N),
    "c_cube_tilde": lambda N, dimension=3: c_cube_tilde(N),
}


def reference_copula(name: str, N: int, dimension: Optional[int] = None) -> CheckerboardCopula:
    try:
        make = REFERENCE_COPULAS[name]
    except KeyError:
        raise ValueError(f"unknown copula {name!r}; choose from "
                         f"{sorted(REFERENCE_COPULAS)}") from None
    return make(N) if dimension is None else make(N, dimension)


def sample_marshall_olkin(alpha: float, beta: float, n: int,
                          seed: Optional[int] = None, rng=None) -> Sample:
    """Draw ``n`` pairs from the Marshall-Olkin copula ``MO(alpha, beta)``.

    Uses ``U = max(V1**(1/(1-alpha)), V3**(1/alpha))`` and
    ``V = max(V2**(1/(1-beta)), V3**(1/beta))`` with ``V1, V2, V3`` i.i.d.
    uniform; a parameter equal to 1 drops the first branch.
    """
    for name, val in (("alpha", alpha), ("beta", beta)):
        if not 0.0 < val <= 1.0:
            raise ValueError(f"{name} must lie in (0, 1], got {val}")
    if rng is None:
        rng = rng_for(seed)
    v = rng.random((n, 3))

    def branch(v_own, par):
        if par == 1.0:
            return np.zeros_like(v_own)
        return v_own ** (1.0 / (1.0 - par))

    u = np.maximum(branch(v[:, 0], alpha), v[:, 2] ** (1.0 / alpha))
    w = np.maximum(branch(v[:, 1], beta), v[:, 2] ** (1.0 / beta))
    return Sample(np.column_stack([u, w]), ("U", "V"), 1)


def _indep_normal_exp(rng, n):
    return rng.standard_normal((n, 2)), rng.exponential(1.0, n)


def _noisy_chain(rng, n):
    x1 = rng.random(n)
    x2 = x1 + rng.normal(0.0, 0.1, n)
    x3 = rng.exponential(1.0, n)
    return np.column_stack([x1, x2, x3]), rng.random(n)


def _double_mod(rng, n):
    x1 = rng.random(n)
    x2 = np.mod(2.0 * x1, 1.0) + rng.normal(0.0, 0.1, n)
    x3 = rng.random(n)
    x4 = np.mod(2.0 * x3, 1.0) + rng.normal(0.0, 0.1, n)
    return np.column_stack([x1, x2, x3, x4]), rng.random(n)


def _cube_scenario(rng, n):
    from .linkage import rosenblatt_inverse
    z = rosenblatt_inverse(c_cube(2), _open_uniform(rng, (n, 3)))
    return z[:, :2], z[:, 2]


def _open_uniform(rng, shape):
    u = rng.random(shape)
    # Generator.random is [0, 1); reflect onto (0, 1]
    return 1.0 - u


def _circle_sq(rng, n):
    x = rng.uniform(-1.0, 1.0, (n, 2))
    return x, x[:, 0] ** 2 + x[:, 1] ** 2


def _ratio_normal(rng, n):
    x = rng.standard_normal((n, 2))
    return x, x[:, 0] / x[:, 1]


def _mod_sum3(rng, n):
    x1 = rng.random(n)
    x2 = np.mod(2.0 * x1, 1.0)
    x3 = rng.random(n)
    return np.column_stack([x1, x2, x3]), np.mod(x1 + x2 + x3, 1.0)


def _sum4(rng, n):
    x = rng.random((n, 4))
    return x, x.sum(axis=1)


def _marshall_olkin_sum(rng, n):
    x = sample_marshall_olkin(0.5, 1.0, n, rng=rng).values
    return x, x[:, 0] + x[:, 1]


def _mod2_exact(rng, n):
    x1 = rng.random(n)
    return np.column_stack([x1, np.mod(2.0 * x1, 1.0)]), x1.copy()


SCENARIOS = {
    "indep_normal_exp": _indep_normal_exp,
    "noisy_chain": _noisy_chain,
    "double_mod": _double_mod,
    "cube": _cube_scenario,
    "circle_sq": _circle_sq,
    "ratio_normal": _ratio_normal,
    "mod_sum3": _mod_sum3,
    "sum4": _sum4,
    "marshall_olkin_sum": _marshall_olkin_sum,
    "mod2_exact": _mod2_exact,
}


def sample_scenario(name: str, n: int, seed: Optional[int] = None, stream: int = 0) -> Sample:
    """Draw a sample of size ``n`` from a named simulation scenario.

    The response is the last column.  The result depends only on
    ``(name, n, seed, stream)``.
    """
    try:
        make = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    if n < 2:
        raise ValueError("n must be at least 2")
    x, y = make(rng_for(seed, stream), n)
    return Sample.from_columns(x, y)
