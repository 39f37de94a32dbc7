# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner-loop kernels.

Mirrors ``_pure.py``: same formulas in the same evaluation order, so both
backends agree bit-for-bit on the same inputs. Query times must be
non-decreasing (all callers sample on time grids).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "cython"


cdef inline double _lerp(double t, double t0, double t1, double p0, double p1) nogil:
    # Same expression as np.interp: exact at the left node.
    return (p1 - p0) / (t1 - t0) * (t - t0) + p0


def interp_polyline(tp, px, py, tq):
    """Sample the polyline (tp, px, py) at non-decreasing query times tq."""
    cdef const double[::1] t = np.ascontiguousarray(tp, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(py, dtype=np.float64)
    cdef const double[::1] q = np.ascontiguousarray(tq, dtype=np.float64)
    cdef Py_ssize_t n = t.shape[0], m = q.shape[0]
    out_x = np.empty(m, dtype=np.float64)
    out_y = np.empty(m, dtype=np.float64)
    cdef double[::1] ox = out_x
    cdef double[::1] oy = out_y
    cdef Py_ssize_t i, j = 0
    cdef double tv
    with nogil:
        for i in range(m):
            tv = q[i]
            while j + 2 < n and t[j + 1] <= tv:
                j += 1
            if tv <= t[j]:
                ox[i] = x[j]
                oy[i] = y[j]
            elif tv >= t[j + 1]:
                ox[i] = x[j + 1]
                oy[i] = y[j + 1]
            else:
                ox[i] = _lerp(tv, t[j], t[j + 1], x[j], x[j + 1])
                oy[i] = _lerp(tv, t[j], t[j + 1], y[j], y[j + 1])
    return out_x, out_y


def gap_at_times(tp, ax, ay, bx, by, tq):
    """Euclidean distance between two polylines sharing node times tp,
    evaluated at non-decreasing query times tq."""
    cdef const double[::1] t = np.ascontiguousarray(tp, dtype=np.float64)
    cdef const double[::1] pax = np.ascontiguousarray(ax, dtype=np.float64)
    cdef const double[::1] pay = np.ascontiguousarray(ay, dtype=np.float64)
    cdef const double[::1] pbx = np.ascontiguousarray(bx, dtype=np.float64)
    cdef const double[::1] pby = np.ascontiguousarray(by, dtype=np.float64)
    cdef const double[::1] q = np.ascontiguousarray(tq, dtype=np.float64)
    cdef Py_ssize_t n = t.shape[0], m = q.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j = 0
    cdef double tv, dx, dy
    with nogil:
        for i in range(m):
            tv = q[i]
            while j + 2 < n and t[j + 1] <= tv:
                j += 1
            if tv <= t[j]:
                dx = pax[j] - pbx[j]
                dy = pay[j] - pby[j]
            elif tv >= t[j + 1]:
                dx = pax[j + 1] - pbx[j + 1]
                dy = pay[j + 1] - pby[j + 1]
            else:
                dx = _lerp(tv, t[j], t[j + 1], pax[j], pax[j + 1]) - \
                     _lerp(tv, t[j], t[j + 1], pbx[j], pbx[j + 1])
                dy = _lerp(tv, t[j], t[j + 1], pay[j], pay[j + 1]) - \
                     _lerp(tv, t[j], t[j + 1], pby[j], pby[j + 1])
            o[i] = sqrt(dx * dx + dy * dy)
    return out


def first_sign_flip(vals):
    """Indices (i, j) of the first pair of consecutive nonzero entries with
    opposite signs, skipping exact zeros in between. (-1, -1) if none."""
    cdef const double[::1] v = np.ascontiguousarray(vals, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t k, prev = -1
    for k in range(n):
        if v[k] == 0.0:
            continue
        if prev >= 0 and (v[k] > 0.0) != (v[prev] > 0.0):
            return prev, k
        prev = k
    return -1, -1
