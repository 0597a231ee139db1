"""Exact dependence values and metrics on checkerboard copulas.

Every quantity here integrates piecewise-linear conditional distribution
functions.  On a segment where the integrand ``g`` is linear the integral of
``|g|`` is taken in closed form, splitting at the root when the endpoint
signs differ, so no quadrature tolerance is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (CROSS_TOL, CheckerboardCopula, ConditionalCdf, DependenceEstimate,
                   DomainError, Sample, marginalize, move_response_last)
from .empirical import empirical_checkerboard, ranks, resolution_for

_I64_SAFE = 2**62


@dataclass(frozen=True)
class MetricResult:
    kind: str
    value: float
    grid: int
    p: Optional[float] = None

    def __float__(self):
        return self.value


def _conditional_table(cb: CheckerboardCopula):
    """Per occupied predictor cell: its key and cumulative response masses.

    Returns ``(dkeys, cum)`` where ``cum`` has shape ``(cells, N+1)`` and holds
    numerators (exact copulas) or float masses.
    """
    N = cb.resolution
    dkey = cb.index // N
    ycell = cb.index % N
    uniq, inv = np.unique(dkey, return_inverse=True)
    table = np.zeros((uniq.size, N + 1), dtype=cb.weights.dtype)
    table[inv, ycell + 1] = cb.weights
    np.cumsum(table, axis=1, out=table)
    return uniq, table


def conditional_cdf(cb: CheckerboardCopula, d_cell: Sequence[int],
                    response_axis: int = -1) -> ConditionalCdf:
    """Conditional distribution function of the response given a predictor cell.

    ``d_cell`` holds zero-based cell coordinates of the predictor axes in
    their original order.  An empty cell yields the uniform distribution
    function, flagged via ``empty``.
    """
    cb = move_response_last(cb, response_axis)
    N, d = cb.resolution, cb.dimension - 1
    d_cell = tuple(int(c) for c in d_cell)
    if len(d_cell) != d or any(not 0 <= c < N for c in d_cell):
        raise ValueError(f"invalid predictor cell {d_cell}")
    key = 0
    for c in d_cell:
        key = key * N + c
    lo, hi = np.searchsorted(cb.index, [key * N, (key + 1) * N])
    if lo == hi:
        return ConditionalCdf(N, np.arange(N + 1) / N, empty=True)
    col = np.zeros(N + 1, dtype=cb.weights.dtype)
    col[cb.index[lo:hi] % N + 1] = cb.weights[lo:hi]
    cum = np.cumsum(col)
    cum = cum / cum[-1]
    cum[-1] = 1.0
    return ConditionalCdf(N, cum)


def _segment_abs(gl, gr, h):
    """Exact integral of ``|g|`` over segments of length ``h`` with linear ``g``."""
    a, b = np.abs(gl), np.abs(gr)
    same = np.sign(gl) * np.sign(gr) >= 0
    total = a + b
    safe = np.where(total > 0, total, 1.0)
    return np.where(same, h * total / 2.0, h * (a * a + b * b) / (2.0 * safe))


def zeta1_exact(cb: CheckerboardCopula, response_axis: int = -1) -> float:
    """Dependence of the response axis on the remaining axes.

    ``3 * sum_i m(i) * int_0^1 |F_i(y) - y| dy`` over predictor cells ``i``
    with mass ``m(i)`` and conditional distribution function ``F_i``.  Cells
    without mass contribute nothing.  The sum is correctly rounded
    (``math.fsum``), so it does not depend on the order of the cells.
    """
    cb = move_response_last(cb, response_axis)
    if cb.dimension < 2:
        raise ValueError("need at least one predictor axis")
    N = cb.resolution
    _, cum = _conditional_table(cb)
    M = cum[:, -1:]
    j = np.arange(N + 1)
    if cb.exact:
        D = cb.denominator
        bound = N * D * (N + 1)
        if bound < _I64_SAFE and cum.shape[0] * 2 * bound < _I64_SAFE:
            # G = N*D*(F - y) at the breakpoints, an exact integer
            G = N * cum - M * j
            gl, gr = G[:, :-1], G[:, 1:]
            same = np.sign(gl) * np.sign(gr) >= 0
            int_part = int((np.abs(gl) + np.abs(gr))[same].sum())
            a = np.abs(gl[~same]).astype(np.float64)
            b = np.abs(gr[~same]).astype(np.float64)
            frac = (a * a + b * b) / (a + b)
            total = math.fsum(np.r_[float(int_part), frac]) if frac.size else float(int_part)
            value = 3.0 * total / (2.0 * N * N * D)
            return min(max(value, 0.0), 1.0)
        cum = cum / float(D)
        M = cum[:, -1:]
    g = cum - M * (j / N)
    terms = _segment_abs(g[:, :-1], g[:, 1:], 1.0 / N)
    value = 3.0 * math.fsum(terms.ravel())
    return min(max(value, 0.0), 1.0)


def zeta1_estimate(sample: Sample, predictor_indices: Optional[Sequence[int]] = None,
                   s: Optional[float] = None, N: Optional[int] = None,
                   tie_policy: str = "midrank", seed: Optional[int] = None,
                   pseudo=None) -> DependenceEstimate:
    """Checkerboard estimate of the dependence of the response on predictors.

    Parameters
    ----------
    sample : Sample
    predictor_indices : sequence of int, optional
        Column indices of the predictors; all non-response columns by default.
    s : float, optional
        Resolution exponent, ``N = max(2, floor(n**s))``; defaults to
        ``1/rho`` for ``rho = len(predictors) + 1``.
    N : int, optional
        Explicit resolution, overrides ``s``.
    tie_policy, seed
        Passed to :func:`ranks`.
    pseudo : PseudoSample, optional
        Precomputed ranks of ``sample`` (reused by permutation tests).
    """
    preds = tuple(sample.predictor_indices if predictor_indices is None
                  else (int(a) for a in predictor_indices))
    resp = sample.response_index
    if not preds:
        raise ValueError("need at least one predictor")
    if resp in preds:
        raise ValueError("predictors must not include the response")
    if len(set(preds)) != len(preds) or any(not 0 <= a < sample.rho for a in preds):
        raise ValueError(f"invalid predictor indices {preds}")
    n = sample.n
    rho = len(preds) + 1
    if N is None:
        N = resolution_for(n, rho, s)
        s_used = 1.0 / rho if s is None else float(s)
    else:
        if N < 1:
            raise ValueError("resolution must be positive")
        s_used = None
    if pseudo is None:
        pseudo = ranks(sample, tie_policy, seed)
    cb = empirical_checkerboard(pseudo.select(list(preds) + [resp]), N)
    value = zeta1_exact(cb)
    names = sample.column_names
    return DependenceEstimate(value, n, N, s_used, preds, resp, seed, tie_policy,
                              tuple(names[a] for a in preds), names[resp])


def pairwise_profile(sample: Sample, s: Optional[float] = None, N: Optional[int] = None,
                     tie_policy: str = "midrank", seed: Optional[int] = None):
    """Estimates for every single predictor followed by the full predictor set."""
    pseudo = ranks(sample, tie_policy, seed)
    preds = sample.predictor_indices
    subsets = [(a,) for a in preds]
    if len(preds) > 1:
        subsets.append(preds)
    return [zeta1_estimate(sample, sub, s=s, N=N, tie_policy=tie_policy, seed=seed,
                           pseudo=pseudo) for sub in subsets]


# metrics on linkages --------------------------------------------------------

def is_linkage(cb: CheckerboardCopula, tol: float = CROSS_TOL) -> bool:
    """True if the predictor margin (all but the last axis) is uniform."""
    d = cb.dimension - 1
    marg = marginalize(cb, list(range(d)))
    if marg.index.size != cb.resolution ** d:
        return False
    return bool(np.max(np.abs(marg.mass - cb.resolution ** -float(d))) <= tol)


def _require_linkage(cb):
    if cb.dimension < 2 or not is_linkage(cb):
        raise DomainError("metric needs linkage inputs (uniform predictor margin); "
                          "transform general copulas with qmd.linkage first")


def _cdf_rows(cb):
    """Dense normalised cumulative table over all predictor cells of a linkage."""
    N, d = cb.resolution, cb.dimension - 1
    keys, cum = _conditional_table(cb)
    cum = cum.astype(np.float64)
    cum /= cum[:, -1:]
    full = np.tile(np.arange(N + 1) / N, (N ** d, 1))
    full[keys] = cum
    return full


def _eval_rows(table, N, y):
    """Evaluate every row's piecewise-linear CDF at the points ``y``."""
    c = np.minimum(np.floor(y * N).astype(np.int64), N - 1)
    t = y * N - c
    return table[:, c] + (table[:, c + 1] - table[:, c]) * t


def _axis_pairs(Na, Nb):
    L = math.lcm(Na, Nb)
    cuts = np.union1d(np.arange(Na + 1) * (L // Na), np.arange(Nb + 1) * (L // Nb))
    mid = (cuts[:-1] + cuts[1:]) / 2.0
    return (np.floor(mid / (L // Na)).astype(np.int64),
            np.floor(mid / (L // Nb)).astype(np.int64),
            np.diff(cuts) / L)


class _LinkagePair:
    """Common refinement of two linkages: predictor-cell pairs and y-breakpoints."""

    def __init__(self, a: CheckerboardCopula, b: CheckerboardCopula):
        if a.dimension != b.dimension:
            raise ValueError("linkages must have the same dimension")
        _require_linkage(a)
        _require_linkage(b)
        d = a.dimension - 1
        Na, Nb = a.resolution, b.resolution
        ia, ib, vol = _axis_pairs(Na, Nb)
        ka = np.zeros(1, dtype=np.int64)
        kb = np.zeros(1, dtype=np.int64)
        w = np.ones(1)
        for _ in range(d):
            ka = (ka[:, None] * Na + ia[None, :]).ravel()
            kb = (kb[:, None] * Nb + ib[None, :]).ravel()
            w = (w[:, None] * vol[None, :]).ravel()
        self.ka, self.kb, self.weight = ka, kb, w
        self.grid = math.lcm(Na, Nb)
        self.ys = np.union1d(np.arange(Na + 1) / Na, np.arange(Nb + 1) / Nb)
        self.ta, self.tb = _cdf_rows(a), _cdf_rows(b)
        self.Na, self.Nb = Na, Nb

    def diff(self, y):
        y = np.asarray(y, dtype=np.float64)
        fa = _eval_rows(self.ta, self.Na, y)[self.ka]
        fb = _eval_rows(self.tb, self.Nb, y)[self.kb]
        return fa - fb

    def segments(self):
        g = self.diff(self.ys)
        return g[:, :-1], g[:, 1:], np.diff(self.ys)


def phi(a: CheckerboardCopula, b: CheckerboardCopula, y) -> float:
    """Predictor-averaged absolute difference of the conditional CDFs at ``y``."""
    y = float(y)
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"y must lie in [0, 1], got {y}")
    pair = _LinkagePair(a, b)
    return math.fsum(pair.weight * np.abs(pair.diff(np.array([y]))[:, 0]))


def phi_curve(a, b, ys) -> np.ndarray:
    """:func:`phi` on an array of ``y`` values."""
    ys = np.asarray(ys, dtype=np.float64)
    if np.any(ys < 0) or np.any(ys > 1):
        raise ValueError("y values must lie in [0, 1]")
    pair = _LinkagePair(a, b)
    return pair.weight @ np.abs(pair.diff(ys))


def d1(a: CheckerboardCopula, b: CheckerboardCopula) -> MetricResult:
    pair = _LinkagePair(a, b)
    gl, gr, h = pair.segments()
    terms = pair.weight[:, None] * _segment_abs(gl, gr, h[None, :])
    return MetricResult("D1", min(math.fsum(terms.ravel()), 1.0), pair.grid)


def d_infty(a: CheckerboardCopula, b: CheckerboardCopula) -> MetricResult:
    """Supremum over ``y`` of :func:`phi`.

    ``phi`` is piecewise linear with kinks only at grid breakpoints and at
    sign changes of the cellwise differences, so its maximum is attained at
    one of those points.
    """
    pair = _LinkagePair(a, b)
    gl, gr, h = pair.segments()
    cross = np.sign(gl) * np.sign(gr) < 0
    rows, segs = np.nonzero(cross)
    a_, b_ = np.abs(gl[rows, segs]), np.abs(gr[rows, segs])
    roots = pair.ys[segs] + h[segs] * a_ / (a_ + b_)
    cand = np.unique(np.r_[pair.ys, np.clip(roots, 0.0, 1.0)])
    best = 0.0
    for start in range(0, cand.size, 4096):
        vals = pair.weight @ np.abs(pair.diff(cand[start:start + 4096]))
        best = max(best, float(vals.max()))
    return MetricResult("Dinfty", min(best, 1.0), pair.grid)


def _segment_pow(gl, gr, h, p):
    if p == 2.0:
        return h * (gl * gl + gl * gr + gr * gr) / 3.0
    a, b = np.abs(gl), np.abs(gr)
    same = np.sign(gl) * np.sign(gr) >= 0
    out = np.empty(np.broadcast(a, b, h).shape)
    h = np.broadcast_to(h, out.shape)
    close = np.abs(b - a) <= 1e-7 * np.maximum(a, b)
    m = same & close
    out[m] = h[m] * ((a[m] + b[m]) / 2.0) ** p
    m = same & ~close
    out[m] = h[m] * (b[m] ** (p + 1) - a[m] ** (p + 1)) / ((p + 1) * (b[m] - a[m]))
    m = ~same
    out[m] = h[m] * (a[m] ** (p + 1) + b[m] ** (p + 1)) / ((p + 1) * (a[m] + b[m]))
    return out


def d_p(a: CheckerboardCopula, b: CheckerboardCopula, p: float) -> MetricResult:
    """``L^p`` distance of the conditional CDFs (returns ``D_p``, not ``D_p**p``)."""
    p = float(p)
    if not 1.0 < p < math.inf:
        raise ValueError("p must lie in (1, inf); use d1 or d_infty otherwise")
    pair = _LinkagePair(a, b)
    gl, gr, h = pair.segments()
    terms = pair.weight[:, None] * _segment_pow(gl, gr, h[None, :], p)
    return MetricResult(f"D{p:g}", min(math.fsum(terms.ravel()) ** (1.0 / p), 1.0),
                        pair.grid, p)
