"""Independent reference computations used as test oracles.

Nothing here calls the closed forms under test except where a test checks
enumeration and bookkeeping on top of an already-verified primitive.
"""
import math

import numpy as np

from tightlid.moving_center import Case, adjusted_distance


def bisect_adjusted(q, x, v, r, iters=200):
    """Root of ``g(t) = ||center(t) - v|| - t`` on ``[0, r]`` by bisection, row-wise.

    ``g`` is non-increasing because the center moves at speed ``||q-x||/r <= 1``.
    """
    q, x, v = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (q, x, v))
    r = np.broadcast_to(np.asarray(r, dtype=float), q.shape[:1]).astype(float)
    lo = np.zeros_like(r)
    hi = r * (1.0 + 1e-9)

    def g(t):
        c = (t / r)[:, None] * q + (1.0 - t / r)[:, None] * x
        return np.linalg.norm(c - v, axis=1) - t

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = g(mid) > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return 0.5 * (lo + hi)


def brute_knn(coords, query, k, skip=-1, torus=False):
    """Full sort of all distances; ties by index via a stable sort."""
    coords = np.asarray(coords, dtype=float)
    d2 = []
    for i, p in enumerate(coords):
        if i == skip:
            d2.append(math.inf)
            continue
        acc = 0.0
        for a, b in zip(query, p):
            delta = b - a
            if torus:
                delta -= math.floor(delta + 0.5)
            acc += delta * delta
        d2.append(acc)
    order = sorted(range(len(d2)), key=lambda i: (d2[i], i))[:k]
    return np.array(order), np.sqrt(np.array([d2[i] for i in order]))


def naive_pairwise(points):
    points = np.asarray(points, dtype=float)
    k = len(points)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            out[i, j] = math.sqrt(sum((a - b) ** 2 for a, b in zip(points[i], points[j])))
    return out


def naive_tle(q, nbrs, r, reflected, central, query_target=False):
    """Double loop over (start, target) pairs returning ``(value, n_terms, n_clamped)``.

    Start points are the neighbors (plus ``q`` for central variants); targets
    are the neighbors (plus ``q`` when ``query_target``), skipping ``x == v``
    by position. Each pair adds ``ln(d(x,v)/r)`` and, when reflected,
    ``ln(d(2q-x,v)/r)`` in that order.
    """
    q = np.asarray(q, dtype=float)
    starts = [np.asarray(p, dtype=float) for p in nbrs]
    if central:
        starts.append(q)
    targets = starts if query_target else starts[: len(nbrs)]
    eps = 1e-9 * r
    total = 0.0
    terms = 0
    clamped = 0

    def measure(x, v):
        nonlocal clamped
        res = adjusted_distance(q, x, v, r)
        t = res.t
        if res.case is Case.CLAMPED_DEGENERATE or t <= 0.0:
            clamped += 1
            t = eps
        return math.log(t / r)

    for a, x in enumerate(starts):
        for b, v in enumerate(targets):
            if a == b:
                continue
            if reflected:
                total += measure(x, v) + measure(2.0 * q - x, v)
                terms += 2
            else:
                total += measure(x, v)
                terms += 1
    return -1.0 / (total / terms), terms, clamped


def power_law_sample(rng, m, size, w=1.0):
    """Distances with c.d.f. ``(t/w)^m`` by inversion, sorted."""
    return np.sort(w * rng.random(size) ** (1.0 / m))
