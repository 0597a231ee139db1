"""Pseudo-observations and empirical checkerboard copulas.

The empirical copula is taken as the multilinear extension of the empirical
subcopula: observation ``k`` carries mass ``1/n`` spread uniformly over the box
``prod_a ((first_a - 1)/n, last_a/n]``, where ``first_a..last_a`` are the ranks
occupied by its tie block in column ``a`` (a single rank without ties).  The
checkerboard approximation at resolution ``N`` integrates that density over
the ``N``-grid cells.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from ._backend import kernels
from .core import (CheckerboardCopula, PseudoSample, ResourceError, Sample,
                   TIE_POLICIES, aggregate, _INT_LIMIT)

#: output grids beyond this many cells are refused
GRID_CELL_CAP = 10**12


def ranks(sample: Sample, tie_policy: str = "midrank",
          seed: Optional[int] = None) -> PseudoSample:
    """Column-wise ranks divided by ``n``.

    ``midrank`` averages the ranks of tied values; ``random`` breaks ties
    uniformly at random using ``seed``.  The response column keeps its
    position.

    >>> s = Sample([[3.2, 0.], [-1., 1.], [7., 2.]], ("x", "y"), 1)
    >>> ranks(s).ranks[:, 0].tolist() == [2/3, 1/3, 1.0]
    True
    """
    if tie_policy not in TIE_POLICIES:
        raise ValueError(f"unknown tie policy {tie_policy!r}")
    x = sample.values
    n = sample.n
    if tie_policy == "midrank":
        r = rankdata(x, method="average", axis=0)
    else:
        rng = np.random.default_rng(seed)
        r = np.empty_like(x)
        for a in range(sample.rho):
            # lexsort by (value, random key): ties resolved by the random key
            order = np.lexsort((rng.random(n), x[:, a]))
            r[order, a] = np.arange(1, n + 1)
    return PseudoSample(r / n, tie_policy, seed, sample.response_index,
                        sample.column_names)


def resolution_for(n: int, rho: int, s: Optional[float] = None) -> int:
    """Checkerboard resolution ``max(2, floor(n**s))`` with default ``s = 1/rho``.

    The floor is taken with a relative slack of ``1e-9`` so that exact
    powers such as ``1000**(1/3)`` are not lost to rounding.
    """
    if n < 2 or rho < 2:
        raise ValueError("need n >= 2 and rho >= 2")
    if s is None:
        s = 1.0 / rho
    if not 0.0 < s < 1.0:
        raise ValueError(f"exponent s must lie in (0, 1), got {s}")
    return max(2, int(math.floor(n ** s * (1.0 + 1e-9))))


def _tie_blocks(pseudo: PseudoSample):
    """First and last occupied rank (1-based) per entry."""
    r = pseudo.ranks
    first = rankdata(r, method="min", axis=0).astype(np.int64)
    last = rankdata(r, method="max", axis=0).astype(np.int64)
    return first, last


def spread_boxes(lo, hi, unit, N, weights=None, widths=None, denominator=None):
    """Aggregate weighted boxes ``[lo, hi)`` (integer units) onto the ``N``-grid.

    ``unit`` is the number of integer units per grid cell.  With integer
    ``weights`` the cell numerators are ``sum(weight * prod(overlap))`` over
    ``denominator``; otherwise float weights are multiplied by the product
    of overlap fractions ``overlap / widths``.
    """
    rho = lo.shape[1]
    if N ** rho > GRID_CELL_CAP:
        raise ResourceError(f"grid {N}^{rho} exceeds the cap of {GRID_CELL_CAP} cells")
    if denominator is not None:
        keys, vals = kernels.spread_int(lo, hi, unit, N, weights)
        keys, vals = aggregate(keys, vals)
        return CheckerboardCopula(rho, N, keys, vals, denominator, validate=False)
    keys, vals = kernels.spread_float(lo, hi, unit, N, weights, widths)
    keys, vals = aggregate(keys, vals)
    return CheckerboardCopula(rho, N, keys, vals, None, validate=False)


def empirical_checkerboard(pseudo: PseudoSample, N: int,
                           exact: Optional[bool] = None) -> CheckerboardCopula:
    """``N``-checkerboard of the multilinear empirical copula of ``pseudo``.

    Axes follow the column order of ``pseudo``.  Without ties the cell
    masses are computed in exact integer arithmetic on the common grid of
    ``lcm(n, N)`` units whenever the resulting denominator stays below
    ``2**53``; ``exact=False`` forces float arithmetic.
    """
    if N < 1:
        raise ValueError("resolution must be at least 1")
    n, rho = pseudo.ranks.shape
    first, last = _tie_blocks(pseudo)
    L = math.lcm(n, N)
    step = L // n
    lo = (first - 1) * step
    hi = last * step
    unit = L // N
    tied = bool(np.any(first != last))
    denom = n * step ** rho
    if exact is None:
        exact = not tied and denom < _INT_LIMIT
    elif exact and (tied or denom >= _INT_LIMIT):
        raise ValueError("exact aggregation needs tie-free ranks and a small grid")
    if exact:
        cb = spread_boxes(lo, hi, unit, N, np.ones(n, dtype=np.int64), denominator=denom)
    else:
        widths = ((last - first + 1) * step).astype(np.float64)
        cb = spread_boxes(lo, hi, unit, N, np.full(n, 1.0 / n), widths)
    return cb


def checkerboard_approximation(cb: CheckerboardCopula, K: int) -> CheckerboardCopula:
    """``K``-checkerboard approximation of a checkerboard copula.

    Each source cell is a box of uniform density, so the result is exact;
    for ``K`` a multiple of the source resolution it represents the same
    copula on a finer grid, for a divisor it merges blocks of cells.
    """
    N = cb.resolution
    L = math.lcm(N, K)
    step = L // N
    cells = cb.cells
    lo = cells * step
    hi = lo + step
    if cb.exact:
        denom = cb.denominator * step ** cb.dimension
        if denom < _INT_LIMIT:
            return spread_boxes(lo, hi, L // K, K, cb.weights, denominator=denom)
    widths = np.full(lo.shape, float(step))
    return spread_boxes(lo, hi, L // K, K, cb.mass, widths)
