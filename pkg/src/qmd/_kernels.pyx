# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled box-spreading kernels; see ``_kernels_py`` for the contract."""
import numpy as np
cimport numpy as cnp

BACKEND = "cython"

ctypedef cnp.int64_t i64


cdef inline i64 _floordiv(i64 a, i64 b) nogil:
    cdef i64 q = a // b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


cdef i64 _count(const i64[:, ::1] lo, const i64[:, ::1] hi, i64 cw):
    cdef Py_ssize_t o, a
    cdef i64 total = 0, prod
    for o in range(lo.shape[0]):
        prod = 1
        for a in range(lo.shape[1]):
            prod *= _floordiv(hi[o, a] - 1, cw) - _floordiv(lo[o, a], cw) + 1
        total += prod
    return total


def spread_int(lo, hi, i64 cw, i64 N, weights):
    cdef const i64[:, ::1] lo_v = np.ascontiguousarray(lo, dtype=np.int64)
    cdef const i64[:, ::1] hi_v = np.ascontiguousarray(hi, dtype=np.int64)
    cdef const i64[::1] w_v = np.ascontiguousarray(weights, dtype=np.int64)
    cdef Py_ssize_t n = lo_v.shape[0], rho = lo_v.shape[1]
    cdef i64 total = _count(lo_v, hi_v, cw)
    keys = np.empty(total, dtype=np.int64)
    vals = np.empty(total, dtype=np.int64)
    cdef i64[::1] k_v = keys
    cdef i64[::1] v_v = vals
    cdef i64[::1] first = np.empty(rho, dtype=np.int64)
    cdef i64[::1] last = np.empty(rho, dtype=np.int64)
    cdef i64[::1] cur = np.empty(rho, dtype=np.int64)
    cdef Py_ssize_t o, a, pos = 0
    cdef i64 key, val, left, right, c
    with nogil:
        for o in range(n):
            for a in range(rho):
                first[a] = _floordiv(lo_v[o, a], cw)
                last[a] = _floordiv(hi_v[o, a] - 1, cw)
                cur[a] = first[a]
            while True:
                key = 0
                val = w_v[o]
                for a in range(rho):
                    c = cur[a]
                    left = lo_v[o, a] if lo_v[o, a] > c * cw else c * cw
                    right = hi_v[o, a] if hi_v[o, a] < (c + 1) * cw else (c + 1) * cw
                    val *= right - left
                    key = key * N + (c if c < N - 1 else N - 1)
                k_v[pos] = key
                v_v[pos] = val
                pos += 1
                a = rho - 1
                while a >= 0:
                    cur[a] += 1
                    if cur[a] <= last[a]:
                        break
                    cur[a] = first[a]
                    a -= 1
                if a < 0:
                    break
    return keys, vals


def spread_float(lo, hi, i64 cw, i64 N, weights, widths):
    cdef const i64[:, ::1] lo_v = np.ascontiguousarray(lo, dtype=np.int64)
    cdef const i64[:, ::1] hi_v = np.ascontiguousarray(hi, dtype=np.int64)
    cdef const double[::1] w_v = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, ::1] wd_v = np.ascontiguousarray(widths, dtype=np.float64)
    cdef Py_ssize_t n = lo_v.shape[0], rho = lo_v.shape[1]
    cdef i64 total = _count(lo_v, hi_v, cw)
    keys = np.empty(total, dtype=np.int64)
    vals = np.empty(total, dtype=np.float64)
    cdef i64[::1] k_v = keys
    cdef double[::1] v_v = vals
    cdef i64[::1] first = np.empty(rho, dtype=np.int64)
    cdef i64[::1] last = np.empty(rho, dtype=np.int64)
    cdef i64[::1] cur = np.empty(rho, dtype=np.int64)
    cdef double[::1] fac = np.empty(rho, dtype=np.float64)
    cdef Py_ssize_t o, a, b, pos = 0
    cdef i64 key, left, right, c
    cdef double prod, t
    with nogil:
        for o in range(n):
            for a in range(rho):
                first[a] = _floordiv(lo_v[o, a], cw)
                last[a] = _floordiv(hi_v[o, a] - 1, cw)
                cur[a] = first[a]
            while True:
                key = 0
                for a in range(rho):
                    c = cur[a]
                    left = lo_v[o, a] if lo_v[o, a] > c * cw else c * cw
                    right = hi_v[o, a] if hi_v[o, a] < (c + 1) * cw else (c + 1) * cw
                    fac[a] = <double>(right - left) / wd_v[o, a]
                    key = key * N + (c if c < N - 1 else N - 1)
                # insertion sort keeps the product independent of axis order
                for a in range(1, rho):
                    t = fac[a]
                    b = a - 1
                    while b >= 0 and fac[b] > t:
                        fac[b + 1] = fac[b]
                        b -= 1
                    fac[b + 1] = t
                prod = fac[0]
                for a in range(1, rho):
                    prod = prod * fac[a]
                k_v[pos] = key
                v_v[pos] = prod * w_v[o]
                pos += 1
                a = rho - 1
                while a >= 0:
                    cur[a] += 1
                    if cur[a] <= last[a]:
                        break
                    cur[a] = first[a]
                    a -= 1
                if a < 0:
                    break
    return keys, vals
