"""Brute-force evaluators that cross-check the exact paths.

These deliberately avoid the closed-form segment integrals used in
:mod:`qmd.measure`: they evaluate conditional distribution functions point
by point and sum or average.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

import numpy as np

from .copulas import rng_for
from .core import CheckerboardCopula, PseudoSample, cells_of, move_response_last
from .empirical import _tie_blocks


def _kernel_rows(cb: CheckerboardCopula):
    """Predictor-cell keys, masses and cumulative response masses (float)."""
    N = cb.resolution
    keys, inv = np.unique(cb.index // N, return_inverse=True)
    rows = np.zeros((keys.size, N + 1))
    rows[inv, cb.index % N + 1] = cb.mass
    rows = np.cumsum(rows, axis=1)
    return keys, rows[:, -1].copy(), rows


def _kernel_at(rows, mass, N, y):
    """``F_i(y)`` for all occupied predictor cells ``i`` and points ``y``."""
    y = np.asarray(y, dtype=np.float64)
    c = np.minimum(np.floor(y * N).astype(np.int64), N - 1)
    t = y * N - c
    val = rows[:, c] + (rows[:, c + 1] - rows[:, c]) * t
    return val / mass[:, None]


def riemann_d1_to_product(cb: CheckerboardCopula, M: int, response_axis: int = -1):
    """Right Riemann sum over ``y = j/M`` of the mass-weighted ``|F_i(y) - y|``.

    Returns ``(value, bound)``; the value lies within ``bound = 2/M`` of the
    distance to independence (one third of the dependence value).
    """
    if M < 1:
        raise ValueError("M must be positive")
    cb = move_response_last(cb, response_axis)
    _, mass, rows = _kernel_rows(cb)
    total = 0.0
    for start in range(1, M + 1, 2048):
        y = np.arange(start, min(start + 2048, M + 1)) / M
        f = _kernel_at(rows, mass, cb.resolution, y)
        total += float(mass @ np.abs(f - y[None, :]).sum(axis=1))
    return total / M, 2.0 / M


def quadrature_zeta1(cb: CheckerboardCopula, step: float = 1e-6,
                     response_axis: int = -1) -> float:
    """Midpoint-rule dependence value with ``y`` step ``step``.

    Brute force: ``|F_i(y) - y|`` is evaluated at every midpoint for every
    occupied predictor cell.
    """
    cb = move_response_last(cb, response_axis)
    _, mass, rows = _kernel_rows(cb)
    m = int(round(1.0 / step))
    chunk = max(1, (1 << 22) // max(1, mass.size))
    total = 0.0
    for start in range(0, m, chunk):
        y = (np.arange(start, min(start + chunk, m)) + 0.5) / m
        f = _kernel_at(rows, mass, cb.resolution, y)
        total += float(mass @ np.abs(f - y[None, :]).sum(axis=1))
    return 3.0 * total / m


def _linkage_kernel(cb, x, y):
    """``F(x, y)`` of a linkage at points ``(x, y)`` (float arrays)."""
    N, d = cb.resolution, cb.dimension - 1
    keys, mass, rows = _kernel_rows(cb)
    cells = cells_of(x, N)
    dkey = np.zeros(x.shape[0], dtype=np.int64)
    for a in range(d):
        dkey = dkey * N + cells[:, a]
    pos = np.searchsorted(keys, dkey)
    pos = np.minimum(pos, keys.size - 1)
    found = keys[pos] == dkey
    c = np.minimum(np.floor(y * N).astype(np.int64), N - 1)
    t = y * N - c
    lo = rows[pos, c]
    hi = rows[pos, c + 1]
    out = (lo + (hi - lo) * t) / mass[pos]
    return np.where(found, out, y)


def mc_d1(a: CheckerboardCopula, b: CheckerboardCopula, draws: int,
          seed: Optional[int] = None):
    """Monte Carlo estimate of the D1 distance with its standard error."""
    if a.dimension != b.dimension:
        raise ValueError("dimension mismatch")
    rng = rng_for(seed)
    pts = rng.random((draws, a.dimension))
    x, y = pts[:, :-1], pts[:, -1]
    diff = np.abs(_linkage_kernel(a, x, y) - _linkage_kernel(b, x, y))
    return float(diff.mean()), float(diff.std(ddof=1) / np.sqrt(draws))


def empirical_copula_cdf(pseudo: PseudoSample, point, exact: bool = False):
    """Multilinear empirical copula of ``pseudo`` evaluated at ``point``.

    With ``exact=True`` the value is computed in rational arithmetic and
    returned as a :class:`~fractions.Fraction` (coordinates are converted
    exactly from their float values).
    """
    pt = np.asarray(point, dtype=np.float64)
    if pt.shape != (pseudo.rho,):
        raise ValueError("point dimension mismatch")
    if np.any(pt < 0) or np.any(pt > 1):
        raise ValueError("point must lie in the unit cube")
    first, last = _tie_blocks(pseudo)
    n = pseudo.n
    if exact:
        total = Fraction(0)
        for k in range(n):
            prod = Fraction(1)
            for a in range(pseudo.rho):
                lo = Fraction(int(first[k, a]) - 1, n)
                hi = Fraction(int(last[k, a]), n)
                x = Fraction(float(pt[a]))
                prod *= min(max((x - lo) / (hi - lo), Fraction(0)), Fraction(1))
                if not prod:
                    break
            total += prod
        return total / n
    lo = (first - 1) / n
    hi = last / n
    frac = np.clip((pt[None, :] - lo) / (hi - lo), 0.0, 1.0)
    return float(np.prod(frac, axis=1).sum() / n)


def checkerboard_cdf(cb: CheckerboardCopula, points) -> np.ndarray:
    """Distribution function of a checkerboard at ``points`` (shape ``(m, rho)``)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    N = cb.resolution
    cells = cb.cells
    out = np.zeros(pts.shape[0])
    for start in range(0, pts.shape[0], 256):
        p = pts[start:start + 256]
        frac = np.clip(p[:, None, :] * N - cells[None, :, :], 0.0, 1.0)
        out[start:start + 256] = np.prod(frac, axis=2) @ cb.mass
    return out
