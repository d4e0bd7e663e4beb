"""Moving-center adjusted distances.

For a neighborhood of radius ``r`` around ``q`` and a start point ``x``,
an expanding ball grows from ``x`` while its center slides linearly to
``q``; at radius ``t`` the center sits at ``(t/r) q + (1 - t/r) x``. The
adjusted distance of ``v`` is the radius at which that ball first reaches
``v``, i.e. the root of ``t = ||center(t) - v||`` in ``[0, r]``.
"""
from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from tightlid import _codes
from tightlid._backend import get_kernels


class Case(enum.IntEnum):
    COINCIDENT_SAMPLE = _codes.COINCIDENT
    STATIONARY_CENTER = _codes.STATIONARY
    TARGET_IS_QUERY = _codes.TARGET_IS_QUERY
    BOUNDARY_CENTER = _codes.BOUNDARY
    INTERIOR_CENTER = _codes.INTERIOR
    CLAMPED_DEGENERATE = _codes.CLAMPED


class AdjustedDistanceResult(NamedTuple):
    t: float
    case: Case


def _validate(q, x, v, r):
    q = np.asarray(q, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if q.shape[-1] != x.shape[-1] or q.shape[-1] != v.shape[-1]:
        raise ValueError("q, x and v must share their last dimension")
    r = np.asarray(r, dtype=np.float64)
    if np.any(~(r > 0)):
        raise ValueError("r must be positive")
    lim = r * (1.0 + _codes.BOUNDARY_RTOL)
    if np.any(np.linalg.norm(q - x, axis=-1) > lim) or np.any(np.linalg.norm(q - v, axis=-1) > lim):
        raise ValueError("x and v must lie within distance r of q")
    return q, x, v, r


def adjusted_distance(q, x, v, r: float, backend=None) -> AdjustedDistanceResult:
    """Adjusted distance ``d_{q,r}(x, v)`` with the case that produced it.

    Cases are tried in order: ``v == x`` (0), ``x == q`` (plain ``||q - v||``),
    ``v == q`` (``r ||q-x|| / (r + ||q-x||)``), ``||q - x|| == r`` within a
    relative 1e-9 (boundary closed form), otherwise the interior closed form.
    Degenerate or non-finite results come back as ``1e-9 * r`` flagged
    ``CLAMPED_DEGENERATE`` instead of raising.
    """
    q, x, v, r = _validate(np.ravel(q), np.ravel(x), np.ravel(v), float(r))
    kern = get_kernels(backend)
    t, case = kern.adjusted_distance_rows(q[None, :], x[None, :], v[None, :], np.array([float(r)]))
    return AdjustedDistanceResult(float(t[0]), Case(int(case[0])))


def adjusted_distances(q, x, v, r, backend=None):
    """Row-wise :func:`adjusted_distance` over ``(m, D)`` arrays; returns ``(t, case)``."""
    q, x, v, r = _validate(np.atleast_2d(q), np.atleast_2d(x), np.atleast_2d(v), r)
    q, x, v = (np.ascontiguousarray(a) for a in np.broadcast_arrays(q, x, v))
    r = np.ascontiguousarray(np.broadcast_to(r, q.shape[:1]), dtype=np.float64)
    return get_kernels(backend).adjusted_distance_rows(q, x, v, r)


def reflect(q, x) -> np.ndarray:
    """Point reflection of ``x`` through ``q``: ``2q - x``."""
    return 2.0 * np.asarray(q, dtype=np.float64) - np.asarray(x, dtype=np.float64)


def center(q, x, r: float, t: float) -> np.ndarray:
    """Moving center at radius ``t``."""
    q = np.asarray(q, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return (t / r) * q + (1.0 - t / r) * x
