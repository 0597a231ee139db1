"""Pure numpy implementation of the box-spreading kernels.

Each observation is an axis-aligned box ``[lo, hi)`` in integer grid units
(``cw`` units per cell).  The kernels emit one entry per (box, overlapped
cell) pair, box-major and with the last axis varying fastest; the compiled
twin in ``_kernels.pyx`` emits exactly the same sequence.
"""
import numpy as np

BACKEND = "python"

# entries materialised per chunk
_CHUNK_ENTRIES = 1 << 22


def _spans(lo, hi, cw):
    first = lo // cw
    last = (hi - 1) // cw
    return first, last - first + 1


def _axis_table(lo, hi, cw, first, smax):
    """Cells and integer overlaps per box along one axis, zero-padded."""
    cells = first[:, None] + np.arange(smax, dtype=np.int64)[None, :]
    left = np.maximum(lo[:, None], cells * cw)
    right = np.minimum(hi[:, None], (cells + 1) * cw)
    ov = np.maximum(right - left, 0)
    return cells, ov


def _chunks(counts):
    start, n = 0, counts.shape[0]
    while start < n:
        stop = start + 1
        total = counts[start]
        while stop < n and total + counts[stop] <= _CHUNK_ENTRIES:
            total += counts[stop]
            stop += 1
        yield start, stop
        start = stop


def _emit(lo, hi, cw, N, make_value):
    lo = np.ascontiguousarray(lo, dtype=np.int64)
    hi = np.ascontiguousarray(hi, dtype=np.int64)
    n, rho = lo.shape
    first, span = _spans(lo, hi, cw)
    counts = np.prod(span, axis=1)
    keys_out, vals_out = [], []
    bounds = [(0, n)] if span.max(initial=1) <= 2 else list(_chunks(counts))
    for s0, s1 in bounds:
        smax = span[s0:s1].max(axis=0)
        key = np.zeros((s1 - s0,) + (1,) * rho, dtype=np.int64)
        ovs = []
        for a in range(rho):
            cells, ov = _axis_table(lo[s0:s1, a], hi[s0:s1, a], cw, first[s0:s1, a], smax[a])
            shape = [s1 - s0] + [1] * rho
            shape[a + 1] = smax[a]
            key = key * N + np.minimum(cells, N - 1).reshape(shape)
            ovs.append(ov.reshape(shape))
        full = (s1 - s0,) + tuple(int(m) for m in smax)
        mask = np.ones(full, dtype=bool)
        for ov in ovs:
            mask &= ov > 0
        key = np.broadcast_to(key, full)[mask]
        val = make_value(ovs, full, mask, s0, s1)
        keys_out.append(key)
        vals_out.append(val)
    return np.concatenate(keys_out), np.concatenate(vals_out)


def spread_int(lo, hi, cw, N, weights):
    """Integer entries ``weight * prod(overlap)``."""
    w = np.asarray(weights, dtype=np.int64)

    def value(ovs, full, mask, s0, s1):
        prod = np.broadcast_to(w[s0:s1].reshape((-1,) + (1,) * len(ovs)), full)[mask]
        for ov in ovs:
            prod = prod * np.broadcast_to(ov, full)[mask]
        return prod

    return _emit(lo, hi, cw, N, value)


def spread_float(lo, hi, cw, N, weights, widths):
    """Float entries ``weight * prod(sorted(overlap / width))``."""
    w = np.asarray(weights, dtype=np.float64)
    widths = np.asarray(widths, dtype=np.float64)

    def value(ovs, full, mask, s0, s1):
        rho = len(ovs)
        fac = np.empty((int(mask.sum()), rho), dtype=np.float64)
        for a, ov in enumerate(ovs):
            wa = widths[s0:s1, a].reshape((-1,) + (1,) * rho)
            fac[:, a] = (np.broadcast_to(ov, full).astype(np.float64)
                         / np.broadcast_to(wa, full))[mask]
        fac.sort(axis=1)
        prod = fac[:, 0].copy()
        for a in range(1, rho):
            prod = prod * fac[:, a]
        ww = np.broadcast_to(w[s0:s1].reshape((-1,) + (1,) * rho), full)[mask]
        return prod * ww

    return _emit(lo, hi, cw, N, value)
