"""Pure-numpy implementations of the inner-loop kernels.

Semantics match ``_fast.pyx`` exactly: piecewise-linear sampling reproduces
node values bit-identically and clamps queries outside the node range to the
endpoint values (same convention as ``np.interp``).
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def interp_polyline(tp, px, py, tq):
    """Sample the polyline (tp, px, py) at query times tq.

    tp must be strictly increasing with >= 2 nodes. Returns (qx, qy).
    """
    tp = _as_f64(tp)
    tq = _as_f64(tq)
    qx = np.interp(tq, tp, _as_f64(px))
    qy = np.interp(tq, tp, _as_f64(py))
    return qx, qy


def gap_at_times(tp, ax, ay, bx, by, tq):
    """Euclidean distance between two polylines sharing node times tp,
    evaluated at query times tq."""
    tp = _as_f64(tp)
    tq = _as_f64(tq)
    dx = np.interp(tq, tp, _as_f64(ax)) - np.interp(tq, tp, _as_f64(bx))
    dy = np.interp(tq, tp, _as_f64(ay)) - np.interp(tq, tp, _as_f64(by))
    return np.sqrt(dx * dx + dy * dy)


def first_sign_flip(vals):
    """Indices (i, j) of the first pair of consecutive nonzero entries with
    opposite signs, skipping exact zeros in between. (-1, -1) if none."""
    vals = _as_f64(vals)
    nz = np.flatnonzero(vals)
    if nz.size < 2:
        return -1, -1
    signs = np.sign(vals[nz])
    flips = np.flatnonzero(signs[1:] != signs[:-1])
    if flips.size == 0:
        return -1, -1
    k = flips[0]
    return int(nz[k]), int(nz[k + 1])
