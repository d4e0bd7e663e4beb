"""Point sets, metrics and exact k-nearest-neighbor extraction.

Two metrics are supported: plain Euclidean and the unit flat torus, where
every coordinate wraps with period 1. Torus neighborhoods are returned
unwrapped into a Euclidean chart centered at the query, so all vector
algebra downstream works unchanged.
"""
from __future__ import annotations

import csv
import enum
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from tightlid._backend import get_kernels

# Above this radius a torus chart stops being a faithful local picture.
TORUS_CHART_LIMIT = 0.25


class Metric(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    FLAT_TORUS = "flat_torus"


class InsufficientSampleError(ValueError):
    """Raised when fewer than ``k`` candidate neighbors are available."""


class ChartRadiusWarning(RuntimeWarning):
    """A torus neighborhood is wide enough that the local chart is distorted."""


@dataclass(frozen=True, eq=False)
class PointSet:
    """Immutable ``n x D`` coordinate matrix with an attached metric."""

    coords: np.ndarray
    metric: Metric = Metric.EUCLIDEAN
    label: str = ""

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.float64, copy=True)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[0] < 1 or coords.shape[1] < 1:
            raise ValueError(f"coords must be a non-empty n x D matrix, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coords must be finite")
        metric = Metric(self.metric)
        if metric is Metric.FLAT_TORUS and (coords.min() < 0.0 or coords.max() >= 1.0):
            raise ValueError("flat-torus coordinates must lie in [0, 1)")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "metric", metric)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def is_torus(self) -> bool:
        return self.metric is Metric.FLAT_TORUS

    def __len__(self):
        return self.n


@dataclass(frozen=True, eq=False)
class Neighborhood:
    """A query point, its ``k`` nearest neighbors and their sorted distances.

    ``neighbors`` are chart coordinates (unwrapped for the torus);
    ``indices`` are row indices into the source point set, or -1 when the
    neighborhood was built by hand.
    """

    query: np.ndarray
    neighbors: np.ndarray
    distances: np.ndarray
    indices: np.ndarray = field(default=None)

    def __post_init__(self):
        query = np.asarray(self.query, dtype=np.float64).reshape(-1)
        nbrs = np.asarray(self.neighbors, dtype=np.float64)
        if nbrs.ndim == 1:
            nbrs = nbrs[:, None]
        dist = np.asarray(self.distances, dtype=np.float64).reshape(-1)
        if nbrs.shape[0] < 2:
            raise ValueError("a neighborhood needs k >= 2 neighbors")
        if nbrs.shape[1] != query.size or dist.size != nbrs.shape[0]:
            raise ValueError("query, neighbors and distances disagree in shape")
        if np.any(np.diff(dist) < 0):
            raise ValueError("distances must be sorted ascending")
        idx = self.indices
        idx = np.full(dist.size, -1, dtype=np.int64) if idx is None else np.asarray(idx, np.int64)
        for name, arr in (("query", query), ("neighbors", nbrs), ("distances", dist), ("indices", idx)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_points(cls, query, neighbors) -> "Neighborhood":
        """Build a Euclidean neighborhood from raw coordinates, sorting by distance."""
        query = np.asarray(query, dtype=np.float64).reshape(-1)
        nbrs = np.asarray(neighbors, dtype=np.float64)
        if nbrs.ndim == 1:
            nbrs = nbrs[:, None]
        diff = nbrs - query
        d2 = np.zeros(nbrs.shape[0])
        for j in range(nbrs.shape[1]):
            d2 += diff[:, j] * diff[:, j]
        order = np.argsort(d2, kind="stable")
        return cls(query, nbrs[order], np.sqrt(d2[order]))

    @property
    def k(self) -> int:
        return self.neighbors.shape[0]

    @property
    def radius(self) -> float:
        return float(self.distances[-1])


def _check_k(k, available):
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if k > available:
        raise InsufficientSampleError(f"k={k} neighbors requested but only {available} candidates")


def knn_indices(points: PointSet, queries, k: int, exclude=None, backend=None):
    """Exact kNN for many queries at once.

    Returns ``(indices, distances)``, both ``(m, k)``, rows sorted ascending
    with ties broken by lower point index. ``exclude`` gives one row index
    per query to skip (-1 for none).
    """
    queries = np.ascontiguousarray(np.atleast_2d(np.asarray(queries, dtype=np.float64)))
    if queries.shape[1] != points.dim:
        raise ValueError(f"query dimension {queries.shape[1]} != point dimension {points.dim}")
    m = queries.shape[0]
    exclude = np.full(m, -1, np.int64) if exclude is None else np.asarray(exclude, np.int64)
    available = points.n - (1 if np.any(exclude >= 0) else 0)
    _check_k(k, available)
    kern = get_kernels(backend)
    return kern.knn_batch(points.coords, queries, exclude, int(k), points.is_torus)


def neighborhoods_from_indices(points: PointSet, queries, idx, dist) -> np.ndarray:
    """Stack neighbor chart coordinates into an ``(m, k, D)`` array."""
    nbrs = points.coords[idx]
    if points.is_torus:
        q = np.asarray(queries)[:, None, :]
        delta = nbrs - q
        delta = delta - np.floor(delta + 0.5)
        nbrs = q + delta
        widest = float(dist[:, -1].max()) if dist.size else 0.0
        if widest >= TORUS_CHART_LIMIT:
            warnings.warn(
                f"torus neighborhood radius {widest:.3f} >= {TORUS_CHART_LIMIT}; "
                "chart distances may differ from geodesic ones between neighbors",
                ChartRadiusWarning,
                stacklevel=3,
            )
    return nbrs


def knn(points: PointSet, query, k: int, exclude_self: bool = False, backend=None) -> Neighborhood:
    """The ``k`` nearest neighbors of one query.

    ``query`` is either a row index into ``points`` or a D-vector. With
    ``exclude_self`` an index query skips its own row; a vector query skips
    the lowest-index point that coincides with it exactly.
    """
    if isinstance(query, (int, np.integer)):
        row = int(query)
        qvec = points.coords[row]
        skip = row if exclude_self else -1
    else:
        qvec = np.asarray(query, dtype=np.float64).reshape(-1)
        if qvec.size != points.dim:
            raise ValueError(f"query dimension {qvec.size} != point dimension {points.dim}")
        skip = -1
        if exclude_self:
            diff = points.coords - qvec
            if points.is_torus:
                diff = diff - np.floor(diff + 0.5)
            hits = np.flatnonzero(np.all(diff == 0.0, axis=1))
            if hits.size:
                skip = int(hits[0])
    idx, dist = knn_indices(points, qvec[None, :], k, np.array([skip]), backend=backend)
    nbrs = neighborhoods_from_indices(points, qvec[None, :], idx, dist)
    return Neighborhood(qvec, nbrs[0], dist[0], idx[0])


def pairwise_distances(neigh: Neighborhood) -> np.ndarray:
    """Symmetric ``k x k`` matrix of chart distances between neighbors."""
    v = neigh.neighbors
    d2 = np.zeros((v.shape[0], v.shape[0]))
    for j in range(v.shape[1]):
        diff = v[None, :, j] - v[:, None, j]
        d2 += diff * diff
    return np.sqrt(d2)


def read_csv(path, header: bool = False, metric=Metric.EUCLIDEAN, label=None) -> PointSet:
    """Load a Dataset CSV: one point per row, comma-separated decimals."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if header and rows:
        rows = rows[1:]
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    try:
        data = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    for i, r in enumerate(data):
        if len(r) != width:
            raise ValueError(f"{path}: row {i + 1 + int(header)} has {len(r)} fields, expected {width}")
    return PointSet(np.array(data), metric=metric, label=label if label is not None else str(path))


def write_csv(points: PointSet, path, header: bool = False) -> None:
    """Write a Dataset CSV with round-trip exact (``repr``) decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow([f"x{j}" for j in range(points.dim)])
    for row in points.coords:
        writer.writerow([repr(float(c)) for c in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
