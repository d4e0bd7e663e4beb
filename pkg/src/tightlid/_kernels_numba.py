"""numba kernels. Keep the arithmetic order in sync with ``_kernels_numpy``."""
import math

import numpy as np
from numba import njit, prange

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


@njit(cache=True)
def _sq_dist(a, b, torus):
    acc = 0.0
    for j in range(a.shape[0]):
        d = b[j] - a[j]
        if torus:
            d = d - math.floor(d + 0.5)
        acc += d * d
    return acc


@njit(cache=True)
def _knn_one(coords, q, exclude, k, torus, out_idx, out_dist):
    n = coords.shape[0]
    best = np.full(k, np.inf)
    besti = np.full(k, -1, dtype=np.int64)
    for i in range(n):
        if i == exclude:
            continue
        d2 = _sq_dist(q, coords[i], torus)
        if d2 >= best[k - 1] and besti[k - 1] >= 0:
            continue
        # insert after any equal distance so lower indices win ties
        pos = k - 1
        while pos > 0 and (besti[pos - 1] < 0 or best[pos - 1] > d2):
            pos -= 1
        for s in range(k - 1, pos, -1):
            best[s] = best[s - 1]
            besti[s] = besti[s - 1]
        best[pos] = d2
        besti[pos] = i
    for s in range(k):
        out_idx[s] = besti[s]
        out_dist[s] = math.sqrt(best[s])


@njit(parallel=True, cache=True)
def knn_batch(coords, queries, exclude, k, torus):
    m = queries.shape[0]
    idx = np.empty((m, k), dtype=np.int64)
    dist = np.empty((m, k))
    for i in prange(m):
        _knn_one(coords, queries[i], exclude[i], k, torus, idx[i], dist[i])
    return idx, dist


@njit(cache=True)
def adjusted_distance_scalar(q, x, v, r):
    dim = q.shape[0]
    same_vx = True
    same_xq = True
    same_vq = True
    for j in range(dim):
        if v[j] != x[j]:
            same_vx = False
        if x[j] != q[j]:
            same_xq = False
        if v[j] != q[j]:
            same_vq = False
    if same_vx:
        return 0.0, COINCIDENT
    if same_xq:
        acc = 0.0
        for j in range(dim):
            d = q[j] - v[j]
            acc += d * d
        return math.sqrt(acc), STATIONARY
    qx2 = 0.0
    for j in range(dim):
        d = q[j] - x[j]
        qx2 += d * d
    dqx = math.sqrt(qx2)
    if same_vq:
        return r * dqx / (r + dqx), TARGET_IS_QUERY
    s = 0.0
    w = 0.0
    for j in range(dim):
        a = v[j] - x[j]
        s += a * a
        w += (q[j] - x[j]) * a
    eps = CLAMP_EPS * r
    if abs(dqx - r) <= BOUNDARY_RTOL * r:
        if w <= 0.0:
            return eps, CLAMPED
        t = r * s / (2.0 * w)
        case = BOUNDARY
    else:
        z = r * r - qx2
        root = math.sqrt(w * w + z * s)
        if w > 0.0:
            t = r * s / (root + w)
        else:
            t = r * (root - w) / z
        case = INTERIOR
    if not (t >= 0.0) or math.isinf(t):
        return eps, CLAMPED
    return t, case


@njit(cache=True)
def adjusted_distance_rows(q, x, v, r):
    m = q.shape[0]
    t = np.empty(m)
    case = np.empty(m, dtype=np.int64)
    for i in range(m):
        t[i], case[i] = adjusted_distance_scalar(q[i], x[i], v[i], r[i])
    return t, case


@njit(cache=True)
def _tle_one(q, nbrs, r, reflected, central, query_target):
    k = nbrs.shape[0]
    dim = q.shape[0]
    size = k + 1 if central else k
    pts = np.empty((size, dim))
    pts[:k] = nbrs
    if central:
        pts[k] = q
    targets = size if query_target else k
    mirror = np.empty(dim)
    eps = CLAMP_EPS * r
    total = 0.0
    clamped = 0
    for a in range(size):
        x = pts[a]
        if reflected:
            for j in range(dim):
                mirror[j] = 2.0 * q[j] - x[j]
        for b in range(targets):
            if a == b:
                continue
            v = pts[b]
            t, case = adjusted_distance_scalar(q, x, v, r)
            if case == CLAMPED or t <= 0.0:
                t = eps
                clamped += 1
            if reflected:
                t2, case2 = adjusted_distance_scalar(q, mirror, v, r)
                if case2 == CLAMPED or t2 <= 0.0:
                    t2 = eps
                    clamped += 1
                total += math.log(t / r) + math.log(t2 / r)
            else:
                total += math.log(t / r)
    return total, clamped


@njit(parallel=True, cache=True)
def tle_batch(queries, nbrs, radii, reflected, central, query_target):
    m = queries.shape[0]
    sums = np.empty(m)
    clamped = np.zeros(m, dtype=np.int64)
    for i in prange(m):
        if radii[i] > 0.0:
            sums[i], clamped[i] = _tle_one(
                queries[i], nbrs[i], radii[i], reflected, central, query_target
            )
        else:
            sums[i] = 0.0
    return sums, clamped


@njit(cache=True)
def _lcd_one(nbrs):
    k = nbrs.shape[0]
    npairs = k * (k - 1) // 2
    d = np.empty(npairs)
    p = 0
    dmax = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            d[p] = math.sqrt(_sq_dist(nbrs[a], nbrs[b], False))
            if d[p] > dmax:
                dmax = d[p]
            p += 1
    if dmax <= 0.0:
        return 0.0, 0.0, 0
    eps = CLAMP_EPS * dmax
    total = 0.0
    clamped = 0
    for p in range(npairs):
        t = d[p]
        if t <= 0.0:
            t = eps
            clamped += 1
        total += math.log(t / dmax)
    return total, dmax, clamped


@njit(parallel=True, cache=True)
def lcd_batch(nbrs):
    m = nbrs.shape[0]
    sums = np.empty(m)
    dmax = np.empty(m)
    clamped = np.zeros(m, dtype=np.int64)
    for i in prange(m):
        sums[i], dmax[i], clamped[i] = _lcd_one(nbrs[i])
    return sums, dmax, clamped
