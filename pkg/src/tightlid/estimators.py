"""Local intrinsic dimensionality estimators.

Distance-based: MLE (Hill), MoM, ED, GED work on the sorted neighbor
distances alone. Neighborhood-based: the four TLE variants, LCD and LPCA
need the neighbor coordinates. Every estimator has a row-wise core shared by
the single-neighborhood functions and :func:`estimate_batch`, so a batch
result equals the per-point loop exactly.

Degenerate inputs never raise inside a batch. Zero distances are clamped to
``1e-9`` times the neighborhood scale and counted; estimates whose log-sum
collapses to zero come back as ``+inf`` with status ``degenerate``.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from tightlid import geometry
from tightlid._backend import get_kernels
from tightlid._codes import CLAMP_EPS
from tightlid._kernels_numpy import _libm_log, _seq_sum

OK, DEGENERATE, CLAMPED = 0, 1, 2


class Method(str, enum.Enum):
    TLE = "tle"
    TLE_C = "tle-c"
    TLE_N = "tle-n"
    TLE_CN = "tle-cn"
    MLE = "mle"
    MOM = "mom"
    ED = "ed"
    GED = "ged"
    LCD = "lcd"
    LPCA = "lpca"

    @property
    def is_tle(self):
        return self in _TLE_FLAGS


# (reflected, central) measurement flags per variant
_TLE_FLAGS = {
    Method.TLE: (True, False),
    Method.TLE_C: (True, True),
    Method.TLE_N: (False, False),
    Method.TLE_CN: (False, True),
}


class GedStrategy(str, enum.Enum):
    MAX_OVER_PAIRS = "max-over-pairs"
    HALF_TO_FULL = "half-to-full"


class Status(str, enum.Enum):
    OK = "ok"
    DEGENERATE = "degenerate"
    CLAMPED = "clamped"


_STATUS_BY_CODE = {OK: Status.OK, DEGENERATE: Status.DEGENERATE, CLAMPED: Status.CLAMPED}
_CODE_BY_STATUS = {v: k for k, v in _STATUS_BY_CODE.items()}


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run, with its neighborhood size and parameters.

    Defaults follow the reference parameter table: ``k=100`` and
    ``theta=0.025`` for LPCA.
    """

    method: Method
    k: int = 100
    theta: float = 0.025
    ged_pair_strategy: GedStrategy = GedStrategy.MAX_OVER_PAIRS
    tle_query_target: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "ged_pair_strategy", GedStrategy(self.ged_pair_strategy))
        if int(self.k) != self.k:
            raise ValueError(f"k must be an integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        min_k = 3 if self.method is Method.LCD else 2
        if self.k < min_k:
            raise ValueError(f"{self.method.value} needs k >= {min_k}, got {self.k}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")

    @property
    def name(self) -> str:
        return self.method.value

    def to_dict(self) -> dict:
        out = {"method": self.method.value, "k": self.k}
        if self.method is Method.LPCA:
            out["theta"] = self.theta
        if self.method is Method.GED:
            out["ged_pair_strategy"] = self.ged_pair_strategy.value
        if self.method.is_tle and self.tle_query_target:
            out["tle_query_target"] = True
        return out


@dataclass(frozen=True)
class Estimate:
    value: float
    status: Status = Status.OK
    n_clamped: int = 0

    @property
    def ok(self) -> bool:
        return self.status is not Status.DEGENERATE


def _finish(neg_mean_log, clamped):
    """Turn mean log-ratios (<= 0) into ``(values, codes)``."""
    with np.errstate(divide="ignore"):
        values = -1.0 / neg_mean_log
    degenerate = ~(neg_mean_log < 0.0) | ~np.isfinite(values)
    values = np.where(degenerate, np.inf, values)
    codes = np.where(degenerate, DEGENERATE, np.where(clamped > 0, CLAMPED, OK))
    return values, codes


def _clamp_distances(dist):
    scale = dist[:, -1:]
    bad = (dist <= 0.0) & (scale > 0.0)
    return np.where(bad, CLAMP_EPS * scale, dist), bad.sum(axis=1)


def _check_distances(distances):
    d = np.asarray(distances, dtype=np.float64).reshape(-1)
    if d.size < 2:
        raise ValueError("need at least k = 2 distances")
    if np.any(d < 0) or np.any(np.diff(d) < 0):
        raise ValueError("distances must be non-negative and sorted ascending")
    return d[None, :]


# --- distance-based estimators, row-wise over an (m, k) distance matrix ---

def mle_rows(dist):
    dist, clamped = _clamp_distances(dist)
    k = dist.shape[1]
    rk = dist[:, -1:]
    safe = np.where(rk > 0.0, rk, 1.0)
    mean = _seq_sum(_libm_log(np.where(rk > 0.0, dist / safe, 1.0)), axis=1) / k
    mean = np.where(rk[:, 0] > 0.0, mean, 0.0)
    return (*_finish(mean, clamped), clamped)


def mom_rows(dist):
    k = dist.shape[1]
    w = dist[:, -1]
    mu = _seq_sum(dist, axis=1) / k
    denom = w - mu
    # equal distances can leave mu a rounding error below w
    ok = (w > 0.0) & (denom > 0.0) & (dist[:, 0] < w)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(ok, mu / np.where(ok, denom, 1.0), np.inf)
    ok &= np.isfinite(values) & (values > 0.0)
    values = np.where(ok, values, np.inf)
    zeros = np.zeros(dist.shape[0], dtype=np.int64)
    return values, np.where(ok, OK, DEGENERATE), zeros


def ed_rows(dist):
    dist, clamped = _clamp_distances(dist)
    k = dist.shape[1]
    half = math.ceil(k / 2)
    rk = dist[:, -1]
    rh = dist[:, half - 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        span = _libm_log(np.where(rh > 0.0, rk / np.where(rh > 0.0, rh, 1.0), 1.0))
        values = math.log(k / half) / span
    ok = (span > 0.0) & np.isfinite(values)
    values = np.where(ok, values, np.inf)
    return values, np.where(ok, np.where(clamped > 0, CLAMPED, OK), DEGENERATE), clamped


def ged_rows(dist, strategy=GedStrategy.MAX_OVER_PAIRS):
    dist, clamped = _clamp_distances(dist)
    m, k = dist.shape
    lo = 1 if GedStrategy(strategy) is GedStrategy.MAX_OVER_PAIRS else math.ceil(k / 2)
    ranks = np.arange(lo, k)
    ri = dist[:, lo - 1 : k - 1]
    rk = dist[:, -1:]
    valid = (ri < rk) & (ri > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        span = _libm_log(np.where(valid, rk / np.where(valid, ri, 1.0), 1.0))
        cand = np.where(valid, _libm_log(k / ranks)[None, :] / np.where(valid, span, 1.0), -np.inf)
    values = cand.max(axis=1) if cand.shape[1] else np.full(m, -np.inf)
    ok = np.isfinite(values) & (values > 0.0)
    values = np.where(ok, values, np.inf)
    return values, np.where(ok, np.where(clamped > 0, CLAMPED, OK), DEGENERATE), clamped


def _single(rows_fn, distances, *args) -> Estimate:
    values, codes, clamped = rows_fn(_check_distances(distances), *args)
    return Estimate(float(values[0]), _STATUS_BY_CODE[int(codes[0])], int(clamped[0]))


def estimate_mle(distances) -> Estimate:
    """Hill / MLE estimate ``-(mean_i ln(r_i / r_k))^-1`` over all ``k`` distances."""
    return _single(mle_rows, distances)


def estimate_mom(distances) -> Estimate:
    """Method-of-moments estimate ``mu / (r_k - mu)`` with ``mu`` the mean distance.

    Under the power-law tail ``F(t) = (t/w)^m`` the mean distance is
    ``w m / (m + 1)``; solving for ``m`` with ``w = r_k`` gives this form.
    """
    return _single(mom_rows, distances)


def estimate_ed(distances) -> Estimate:
    """Expansion dimension between the ``ceil(k/2)``-th and ``k``-th neighbor."""
    return _single(ed_rows, distances)


def estimate_ged(distances, strategy=GedStrategy.MAX_OVER_PAIRS) -> Estimate:
    """Generalized expansion dimension: max of ``ln(k/i) / ln(r_k/r_i)`` over ``i``.

    ``MAX_OVER_PAIRS`` uses every ``i < k`` with ``r_i < r_k``;
    ``HALF_TO_FULL`` only ``ceil(k/2) <= i < k``.
    """
    return _single(ged_rows, distances, strategy)


# --- neighborhood-based estimators, row-wise over (m, k, D) neighbor arrays ---

def tle_norm(k: int, method: Method, query_target: bool = False) -> int:
    """Number of log terms a TLE variant sums for ``k`` neighbors."""
    reflected, central = _TLE_FLAGS[Method(method)]
    size = k + 1 if central else k
    targets = size if query_target else k
    return (2 if reflected else 1) * (size * targets - min(size, targets))


def tle_rows(queries, nbrs, radii, method, backend=None, query_target=False):
    reflected, central = _TLE_FLAGS[Method(method)]
    kern = get_kernels(backend)
    sums, clamped = kern.tle_batch(
        np.ascontiguousarray(queries, dtype=np.float64),
        np.ascontiguousarray(nbrs, dtype=np.float64),
        np.ascontiguousarray(radii, dtype=np.float64),
        reflected,
        central,
        bool(query_target),
    )
    mean = sums / tle_norm(nbrs.shape[1], method, query_target)
    return (*_finish(mean, clamped), clamped)


def lcd_rows(nbrs, backend=None):
    kern = get_kernels(backend)
    sums, _, clamped = kern.lcd_batch(np.ascontiguousarray(nbrs, dtype=np.float64))
    k = nbrs.shape[1]
    mean = sums / (k * (k - 1) // 2)
    return (*_finish(mean, clamped), clamped)


def lpca_rows(nbrs, theta):
    m, k, dim = nbrs.shape
    centered = nbrs - nbrs.mean(axis=1, keepdims=True)
    cov = np.einsum("mki,mkj->mij", centered, centered) / max(k - 1, 1)
    eig = np.linalg.eigvalsh(cov)
    top = eig[:, -1]
    ok = top > 0.0
    counts = (eig >= theta * top[:, None]).sum(axis=1).astype(np.float64)
    values = np.where(ok, counts, np.inf)
    zeros = np.zeros(m, dtype=np.int64)
    return values, np.where(ok, OK, DEGENERATE), zeros


def _single_neigh(values, codes, clamped) -> Estimate:
    return Estimate(float(values[0]), _STATUS_BY_CODE[int(codes[0])], int(clamped[0]))


def estimate_tle(
    neigh: geometry.Neighborhood, variant=Method.TLE, backend=None, query_target: bool = False
) -> Estimate:
    """Tight local estimate from moving-center adjusted distances.

    ``variant`` picks the start points of the expansions: ``tle`` (neighbors
    plus their reflections through the query), ``tle-c`` (also the query
    itself), ``tle-n`` (neighbors only) and ``tle-cn`` (neighbors and query,
    no reflections). Targets are the neighbors other than the start point;
    ``query_target=True`` also measures the query as a target, which gives the
    ``|V*|(|V*|-1)`` pair count for the central variants.

    Terms are summed start-point-major over ``[v_1, ..., v_k(, q)]`` with the
    reflected term added to its direct term, so the order is fixed.
    """
    variant = Method(variant)
    if not variant.is_tle:
        raise ValueError(f"{variant.value} is not a TLE variant")
    if neigh.k < 2:
        raise ValueError("TLE needs k >= 2")
    return _single_neigh(
        *tle_rows(
            neigh.query[None, :],
            neigh.neighbors[None],
            np.array([neigh.radius]),
            variant,
            backend,
            query_target,
        )
    )


def estimate_lcd(neigh: geometry.Neighborhood, backend=None) -> Estimate:
    """Local correlation dimension: Hill-type mean over all intra-neighborhood pair distances."""
    if neigh.k < 3:
        raise ValueError("LCD needs k >= 3")
    return _single_neigh(*lcd_rows(neigh.neighbors[None], backend))


def estimate_lpca(neigh: geometry.Neighborhood, theta: float = 0.025) -> Estimate:
    """Number of covariance eigenvalues at least ``theta`` times the largest."""
    return _single_neigh(*lpca_rows(neigh.neighbors[None], theta))


def estimate_global_pca(points: geometry.PointSet, theta: float = 0.025) -> Estimate:
    """LPCA with the whole data set as the neighborhood."""
    return _single_neigh(*lpca_rows(points.coords[None], theta))


def estimate(neigh: geometry.Neighborhood, spec: EstimatorSpec, backend=None) -> Estimate:
    """Apply ``spec`` to one neighborhood (``spec.k`` is taken from ``neigh``)."""
    method = spec.method
    if method.is_tle:
        return estimate_tle(neigh, method, backend, spec.tle_query_target)
    if method is Method.LCD:
        return estimate_lcd(neigh, backend)
    if method is Method.LPCA:
        return estimate_lpca(neigh, spec.theta)
    if method is Method.GED:
        return estimate_ged(neigh.distances, spec.ged_pair_strategy)
    return {Method.MLE: estimate_mle, Method.MOM: estimate_mom, Method.ED: estimate_ed}[method](
        neigh.distances
    )


# --- batches ---

@dataclass(frozen=True, eq=False)
class EstimateBatch:
    """Per-query estimates keyed by point index."""

    point_ids: np.ndarray
    values: np.ndarray
    codes: np.ndarray
    clamped: np.ndarray
    estimator: str
    k: int

    def __len__(self):
        return self.point_ids.size

    @property
    def ok_mask(self) -> np.ndarray:
        return self.codes != DEGENERATE

    @property
    def ok_values(self) -> np.ndarray:
        return self.values[self.ok_mask]

    def statuses(self) -> list:
        return [_STATUS_BY_CODE[int(c)] for c in self.codes]

    def __getitem__(self, i) -> Estimate:
        return Estimate(float(self.values[i]), _STATUS_BY_CODE[int(self.codes[i])], int(self.clamped[i]))

    def to_csv(self, path=None) -> str:
        """``point_id,estimator,k,estimate,status,clamped_pairs``; empty estimate when degenerate."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(BATCH_COLUMNS)
        for pid, val, code, nclamp in zip(self.point_ids, self.values, self.codes, self.clamped):
            status = _STATUS_BY_CODE[int(code)]
            est = "" if status is Status.DEGENERATE else repr(float(val))
            writer.writerow([int(pid), self.estimator, self.k, est, status.value, int(nclamp)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "EstimateBatch":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in BATCH_COLUMNS if c not in (reader.fieldnames or [])]
            if missing:
                raise ValueError(f"{path}: missing column {missing[0]!r}")
            rows = list(reader)
        if not rows:
            raise ValueError(f"{path}: no rows")
        codes = np.array([_CODE_BY_STATUS[Status(r["status"])] for r in rows])
        values = np.array([float(r["estimate"]) if r["estimate"] else np.inf for r in rows])
        return cls(
            np.array([int(r["point_id"]) for r in rows]),
            values,
            codes,
            np.array([int(r["clamped_pairs"]) for r in rows]),
            rows[0]["estimator"],
            int(rows[0]["k"]),
        )


BATCH_COLUMNS = ["point_id", "estimator", "k", "estimate", "status", "clamped_pairs"]

# queries per chunk when neighbor coordinates must be materialized
_QUERY_CHUNK = 1024


def estimate_batch(
    points: geometry.PointSet, spec: EstimatorSpec, queries=None, backend=None, neighbors=None
) -> EstimateBatch:
    """Estimate at each query index (default: every point) from its ``spec.k`` nearest others.

    ``neighbors`` may carry a precomputed ``(indices, distances)`` pair from
    :func:`geometry.knn_indices` for the same queries with at least ``spec.k``
    columns (self excluded); the first ``spec.k`` columns are used.
    """
    n = points.n
    ids = np.arange(n) if queries is None else np.asarray(queries, dtype=np.int64).reshape(-1)
    if ids.size and (ids.min() < 0 or ids.max() >= n):
        raise IndexError("query index out of range")
    if spec.k >= n:
        raise geometry.InsufficientSampleError(f"k={spec.k} needs more than {n} points")
    m = ids.size
    values = np.empty(m)
    codes = np.empty(m, dtype=np.int64)
    clamped = np.empty(m, dtype=np.int64)
    method = spec.method
    for lo in range(0, m, _QUERY_CHUNK):
        sel = ids[lo : lo + _QUERY_CHUNK]
        q = points.coords[sel]
        if neighbors is None:
            idx, dist = geometry.knn_indices(points, q, spec.k, exclude=sel, backend=backend)
        else:
            idx = neighbors[0][lo : lo + sel.size, : spec.k]
            dist = neighbors[1][lo : lo + sel.size, : spec.k]
            if idx.shape != (sel.size, spec.k):
                raise ValueError("precomputed neighbors do not cover the queries at this k")
        if method in (Method.MLE, Method.MOM, Method.ED, Method.GED):
            if method is Method.GED:
                out = ged_rows(dist, spec.ged_pair_strategy)
            else:
                out = {Method.MLE: mle_rows, Method.MOM: mom_rows, Method.ED: ed_rows}[method](dist)
        else:
            nbrs = geometry.neighborhoods_from_indices(points, q, idx, dist)
            if method.is_tle:
                out = tle_rows(q, nbrs, dist[:, -1], method, backend, spec.tle_query_target)
            elif method is Method.LCD:
                out = lcd_rows(nbrs, backend)
            else:
                out = lpca_rows(nbrs, spec.theta)
        values[lo : lo + sel.size], codes[lo : lo + sel.size], clamped[lo : lo + sel.size] = out
    return EstimateBatch(ids, values, codes, clamped, method.value, spec.k)
