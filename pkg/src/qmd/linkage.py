"""Linkages of checkerboard copulas and Rosenblatt transforms.

For a checkerboard the conditional law of one coordinate given the
preceding ones depends only on the cells those coordinates fall in, and it
is uniform inside each cell of the next axis.  Conditional distribution
functions are therefore continuous and piecewise linear, which makes the
Rosenblatt transform and its inverse cheap table lookups.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .copulas import rng_for
from .core import (DENSE_CELL_CAP, CheckerboardCopula, PseudoSample, ResourceError,
                   cells_of, marginalize, move_response_last, ravel_cells)
from .empirical import empirical_checkerboard


class ConditionalChain:
    """Cumulative conditional tables of a checkerboard, one per axis.

    ``tables[m]`` has shape ``(N**m, N+1)``: row ``p`` is the distribution
    function of axis ``m`` at the grid breakpoints, given that axes
    ``0..m-1`` lie in the cells encoded by ``p`` (row-major).  Rows of empty
    prefixes hold the uniform distribution function.
    """

    def __init__(self, cb: CheckerboardCopula):
        N, k = cb.resolution, cb.dimension
        if N ** k > DENSE_CELL_CAP:
            raise ResourceError("conditional tables would exceed the dense cap")
        self.resolution, self.dimension = N, k
        self.tables = []
        for m in range(k):
            marg = marginalize(cb, list(range(m + 1)))
            t = np.zeros((N ** m, N + 1))
            t[marg.index // N, marg.index % N + 1] = marg.mass
            np.cumsum(t, axis=1, out=t)
            tot = t[:, -1:]
            empty = tot[:, 0] <= 0
            t = np.divide(t, tot, out=np.zeros_like(t), where=tot > 0)
            t[empty] = np.arange(N + 1) / N
            t[:, -1] = 1.0
            self.tables.append(t)

    def forward(self, x: np.ndarray) -> np.ndarray:
        N = self.resolution
        u = np.empty_like(x)
        prefix = np.zeros(x.shape[0], dtype=np.int64)
        for m, t in enumerate(self.tables):
            c = cells_of(x[:, m], N)
            rows = t[prefix]
            lo = np.take_along_axis(rows, c[:, None], 1)[:, 0]
            hi = np.take_along_axis(rows, c[:, None] + 1, 1)[:, 0]
            u[:, m] = lo + (hi - lo) * (x[:, m] * N - c)
            prefix = prefix * N + c
        return np.clip(u, 0.0, 1.0)

    def inverse(self, u: np.ndarray) -> np.ndarray:
        N = self.resolution
        z = np.empty_like(u)
        prefix = np.zeros(u.shape[0], dtype=np.int64)
        for m, t in enumerate(self.tables):
            rows = t[prefix]
            # first breakpoint j >= 1 with F(j/N) >= u sits at the right end of cell c
            c = np.minimum((rows[:, 1:] < u[:, m:m + 1]).sum(axis=1), N - 1)
            lo = np.take_along_axis(rows, c[:, None], 1)[:, 0]
            hi = np.take_along_axis(rows, c[:, None] + 1, 1)[:, 0]
            width = hi - lo
            frac = np.divide(u[:, m] - lo, width, out=np.ones_like(lo), where=width > 0)
            z[:, m] = (c + np.clip(frac, 0.0, 1.0)) / N
            prefix = prefix * N + c
        return z


def _as_points(x, k):
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != k:
        raise ValueError(f"points must have {k} coordinates")
    return arr, single


def rosenblatt_forward(cb: CheckerboardCopula, x, r=None, chain: Optional[ConditionalChain] = None):
    """Rosenblatt transform of points ``x`` under the checkerboard ``cb``.

    ``x`` is a ``k``-vector or an ``(m, k)`` array with ``k = cb.dimension``.
    The randomisers ``r`` enter the modified distribution functions only
    through atoms; checkerboard conditionals have none (empty conditioning
    cells fall back to the uniform law), so the result does not depend on
    ``r``.  It is accepted and range-checked for interface completeness.
    """
    pts, single = _as_points(x, cb.dimension)
    if np.any(pts < 0) or np.any(pts > 1):
        raise ValueError("points must lie in [0, 1]")
    if r is not None:
        r = np.asarray(r, dtype=np.float64)
        if np.any(r < 0) or np.any(r > 1):
            raise ValueError("randomisers must lie in [0, 1]")
    chain = chain or ConditionalChain(cb)
    u = chain.forward(pts)
    return u[0] if single else u


def rosenblatt_inverse(cb: CheckerboardCopula, u, chain: Optional[ConditionalChain] = None):
    """Sequential conditional quantile transform; maps uniforms to draws from ``cb``."""
    pts, single = _as_points(u, cb.dimension)
    if np.any(pts < 0) or np.any(pts > 1):
        raise ValueError("uniforms must lie in [0, 1]")
    chain = chain or ConditionalChain(cb)
    z = chain.inverse(pts)
    return z[0] if single else z


def sample_checkerboard(cb: CheckerboardCopula, n: int, seed: Optional[int] = None,
                        stream: int = 0) -> np.ndarray:
    """Draw ``n`` points from ``cb`` by inverting the Rosenblatt transform."""
    u = 1.0 - rng_for(seed, stream).random((n, cb.dimension))
    return rosenblatt_inverse(cb, u)


def linkage_conditionally_independent(biv: CheckerboardCopula, d: int,
                                      j: int = 0) -> CheckerboardCopula:
    """Linkage of a copula whose other coordinates are independent given ``X_j``.

    ``biv`` is the bivariate checkerboard of ``(X_j, Y)``; ``j`` is the
    zero-based predictor position.  Cell ``(i_1, ..., i_d, k)`` of the result
    carries ``biv(i_j, k) / N**(d-1)``.
    """
    if biv.dimension != 2:
        raise ValueError("need a bivariate checkerboard")
    if d < 1 or not 0 <= j < d:
        raise ValueError(f"invalid predictor position {j} for d={d}")
    N = biv.resolution
    cells = biv.cells
    others = np.indices((N,) * (d - 1)).reshape(d - 1, -1).T
    nnz, m = cells.shape[0], others.shape[0]
    full = np.empty((nnz, m, d + 1), dtype=np.int64)
    full[:, :, :j] = others[None, :, :j]
    full[:, :, j] = cells[:, None, 0]
    full[:, :, j + 1:d] = others[None, :, j:]
    full[:, :, d] = cells[:, None, 1]
    keys = ravel_cells(full.reshape(-1, d + 1), N)
    order = np.argsort(keys)
    if biv.exact:
        w = np.repeat(biv.weights, m)[order]
        return CheckerboardCopula(d + 1, N, keys[order], w, biv.denominator * m)
    w = np.repeat(biv.mass / m, m)[order]
    return CheckerboardCopula(d + 1, N, keys[order], w)


def linkage_of_empirical(pseudo: PseudoSample, N: int) -> CheckerboardCopula:
    """Checkerboard of the linkage of the multilinear empirical copula.

    The empirical copula is universally simplified, so its linkage couples
    the first predictor with the response and leaves the other predictors
    independent and uniform.
    """
    resp = pseudo.response_index
    preds = [a for a in range(pseudo.rho) if a != resp]
    biv = empirical_checkerboard(pseudo.select([preds[0], resp]), N)
    return linkage_conditionally_independent(biv, len(preds), 0)


def _interval_overlaps(lo, hi, K):
    """Lengths of ``[lo, hi]`` inside each cell of the ``K``-grid, shape ``(m, K)``."""
    edges = np.arange(K + 1) / K
    left = np.maximum(lo[:, None], edges[None, :-1])
    right = np.minimum(hi[:, None], edges[None, 1:])
    return np.maximum(right - left, 0.0)


def linkage_checkerboard(cb: CheckerboardCopula, resolution: Optional[int] = None,
                         response_axis: int = -1) -> CheckerboardCopula:
    """``K``-checkerboard of the linkage of a checkerboard copula.

    The inverse Rosenblatt map of the predictor margin sends the box
    ``prod_m [F_m(c_m), F_m(c_m + 1)]`` (conditional CDF values at the cell
    edges) onto predictor cell ``c``, so the linkage spreads the conditional
    response law of ``c`` uniformly over that box.  Integrating over the
    ``K``-grid gives the result without sampling.
    """
    cb = move_response_last(cb, response_axis)
    N, d = cb.resolution, cb.dimension - 1
    K = resolution or N
    chain = ConditionalChain(marginalize(cb, list(range(d))))
    dkeys = cb.index // N
    uniq, inv = np.unique(dkeys, return_inverse=True)
    ycond = np.zeros((uniq.size, N))
    ycond[inv, cb.index % N] = cb.mass
    ycond /= ycond.sum(axis=1, keepdims=True)
    if K != N:
        ycond = ycond @ (_interval_overlaps(np.arange(N) / N, np.arange(1, N + 1) / N, K) * N)
    cells = np.stack(np.unravel_index(uniq, (N,) * d), axis=1) if d > 1 else uniq[:, None]
    joint = np.ones((uniq.size, 1))
    prefix = np.zeros(uniq.size, dtype=np.int64)
    for m, t in enumerate(chain.tables):
        c = cells[:, m]
        lo = t[prefix, c]
        hi = t[prefix, c + 1]
        ov = _interval_overlaps(lo, hi, K)
        joint = (joint[:, :, None] * ov[:, None, :]).reshape(uniq.size, -1)
        prefix = prefix * N + c
    dense = joint.T @ ycond
    return CheckerboardCopula.from_dense(dense.reshape((K,) * (d + 1)), validate=False)


def linkage_monte_carlo(cb: CheckerboardCopula, draws: int, seed: Optional[int] = None,
                        resolution: Optional[int] = None, response_axis: int = -1):
    """Monte Carlo cell frequencies of the linkage of ``cb``.

    Draws ``(X, Y)`` from ``cb``, replaces ``X`` by its Rosenblatt transform
    under the predictor margin and counts the points on the ``K``-grid.
    Returns a dense array of relative frequencies (not normalised to a
    copula, sampling noise included).
    """
    cb = move_response_last(cb, response_axis)
    d = cb.dimension - 1
    K = resolution or cb.resolution
    z = sample_checkerboard(cb, draws, seed)
    xmarg = marginalize(cb, list(range(d)))
    u = rosenblatt_forward(xmarg, z[:, :d])
    pts = np.column_stack([u, z[:, d]])
    keys = ravel_cells(cells_of(pts, K), K)
    freq = np.bincount(keys, minlength=K ** (d + 1)) / draws
    return freq.reshape((K,) * (d + 1))
