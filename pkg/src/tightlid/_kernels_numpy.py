"""Vectorized numpy kernels, bit-identical to ``_kernels_numba``.

Identity with the compiled path rests on three rules: coordinate sums run
sequentially in index order, per-query sums are sequential (``cumsum``), and
logarithms go through libm (``math.log``) rather than numpy's SIMD ``log``,
which can differ in the last ulp.
"""
import math

import numpy as np

from tightlid._codes import (
    BOUNDARY,
    BOUNDARY_RTOL,
    CLAMP_EPS,
    CLAMPED,
    COINCIDENT,
    INTERIOR,
    STATIONARY,
    TARGET_IS_QUERY,
)

# elements per temporary (rows * pairs * dims) before chunking
_CHUNK_ELEMS = 1 << 22


def _log_or_special(v):
    # math.log raises where C's log returns -inf or nan
    if v > 0.0:
        return math.log(v)
    return -math.inf if v == 0.0 else math.nan


def _libm_log(a):
    a = np.asarray(a, dtype=np.float64)
    flat = np.fromiter(map(_log_or_special, a.ravel().tolist()), dtype=np.float64, count=a.size)
    return flat.reshape(a.shape)


def _seq_sum(a, axis=-1):
    if a.shape[axis] == 0:
        return np.zeros(np.delete(a.shape, axis))
    return np.take(np.cumsum(a, axis=axis), -1, axis=axis)


def _dot(a, b):
    acc = np.zeros(a.shape[:-1])
    for j in range(a.shape[-1]):
        acc += a[..., j] * b[..., j]
    return acc


def knn_batch(coords, queries, exclude, k, torus):
    coords = np.asarray(coords, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    n, dim = coords.shape
    m = queries.shape[0]
    idx = np.empty((m, k), dtype=np.int64)
    dist = np.empty((m, k))
    step = max(1, _CHUNK_ELEMS // max(1, n * dim))
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        d2 = np.zeros((hi - lo, n))
        for j in range(dim):
            d = coords[None, :, j] - queries[lo:hi, None, j]
            if torus:
                d = d - np.floor(d + 0.5)
            d2 += d * d
        rows = np.arange(hi - lo)
        ex = exclude[lo:hi]
        mask = ex >= 0
        d2[rows[mask], ex[mask]] = np.inf
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        idx[lo:hi] = order
        dist[lo:hi] = np.sqrt(np.take_along_axis(d2, order, axis=1))
    return idx, dist


def adjusted_distance_rows(q, x, v, r):
    """Case ladder over broadcast rows; q, x, v are (..., D), r is (...)."""
    q, x, v = np.broadcast_arrays(
        np.asarray(q, np.float64), np.asarray(x, np.float64), np.asarray(v, np.float64)
    )
    r = np.broadcast_to(np.asarray(r, np.float64), q.shape[:-1])
    same_vx = np.all(v == x, axis=-1)
    same_xq = np.all(x == q, axis=-1)
    same_vq = np.all(v == q, axis=-1)

    qv = q - v
    qx = q - x
    vx = v - x
    qx2 = _dot(qx, qx)
    dqx = np.sqrt(qx2)
    s = _dot(vx, vx)
    w = _dot(qx, vx)
    eps = CLAMP_EPS * r

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t_stat = np.sqrt(_dot(qv, qv))
        t_target = r * dqx / (r + dqx)
        t_bound = r * s / (2.0 * w)
        z = r * r - qx2
        root = np.sqrt(w * w + z * s)
        t_int = np.where(w > 0.0, r * s / (root + w), r * (root - w) / z)

    boundary = np.abs(dqx - r) <= BOUNDARY_RTOL * r
    t = np.where(boundary, t_bound, t_int)
    case = np.where(boundary, BOUNDARY, INTERIOR)
    bad = (boundary & (w <= 0.0)) | ~(t >= 0.0) | np.isinf(t)
    t = np.where(bad, eps, t)
    case = np.where(bad, CLAMPED, case)

    t = np.where(same_vq, t_target, t)
    case = np.where(same_vq, TARGET_IS_QUERY, case)
    t = np.where(same_xq, t_stat, t)
    case = np.where(same_xq, STATIONARY, case)
    t = np.where(same_vx, 0.0, t)
    case = np.where(same_vx, COINCIDENT, case)
    return t, case.astype(np.int64)


def _pairs(size, targets):
    a, b = np.meshgrid(np.arange(size), np.arange(targets), indexing="ij")
    keep = a != b
    return a[keep], b[keep]


def tle_batch(queries, nbrs, radii, reflected, central, query_target):
    queries = np.asarray(queries, np.float64)
    nbrs = np.asarray(nbrs, np.float64)
    radii = np.asarray(radii, np.float64)
    m, k, dim = nbrs.shape
    size = k + 1 if central else k
    xi, vi = _pairs(size, size if query_target else k)
    npairs = xi.size
    sums = np.zeros(m)
    clamped = np.zeros(m, dtype=np.int64)
    step = max(1, _CHUNK_ELEMS // max(1, npairs * dim))
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        q = queries[lo:hi]
        pts = nbrs[lo:hi]
        if central:
            pts = np.concatenate([pts, q[:, None, :]], axis=1)
        r = radii[lo:hi]
        ok = r > 0.0
        # keep zero-radius rows out of the arithmetic; their sums stay 0
        r_safe = np.where(ok, r, 1.0)[:, None]
        eps = CLAMP_EPS * r_safe
        qb = q[:, None, :]
        x = pts[:, xi, :]
        v = pts[:, vi, :]
        t, case = adjusted_distance_rows(qb, x, v, r_safe)
        bad = (case == CLAMPED) | (t <= 0.0)
        t = np.where(bad, eps, t)
        n_bad = bad.sum(axis=1)
        terms = _libm_log(t / r_safe)
        if reflected:
            t2, case2 = adjusted_distance_rows(qb, 2.0 * qb - x, v, r_safe)
            bad2 = (case2 == CLAMPED) | (t2 <= 0.0)
            t2 = np.where(bad2, eps, t2)
            n_bad = n_bad + bad2.sum(axis=1)
            terms = terms + _libm_log(t2 / r_safe)
        sums[lo:hi] = np.where(ok, _seq_sum(terms, axis=1), 0.0)
        clamped[lo:hi] = np.where(ok, n_bad, 0)
    return sums, clamped


def lcd_batch(nbrs):
    nbrs = np.asarray(nbrs, np.float64)
    m, k, dim = nbrs.shape
    a, b = np.triu_indices(k, 1)
    sums = np.zeros(m)
    dmax = np.zeros(m)
    clamped = np.zeros(m, dtype=np.int64)
    step = max(1, _CHUNK_ELEMS // max(1, a.size * dim))
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        diff = nbrs[lo:hi, b, :] - nbrs[lo:hi, a, :]
        d = np.sqrt(_dot(diff, diff))
        top = d.max(axis=1) if d.shape[1] else np.zeros(hi - lo)
        ok = top > 0.0
        top_safe = np.where(ok, top, 1.0)[:, None]
        bad = d <= 0.0
        d = np.where(bad, CLAMP_EPS * top_safe, d)
        terms = _libm_log(d / top_safe)
        sums[lo:hi] = np.where(ok, _seq_sum(terms, axis=1), 0.0)
        dmax[lo:hi] = np.where(ok, top, 0.0)
        clamped[lo:hi] = np.where(ok, bad.sum(axis=1), 0)
    return sums, dmax, clamped
