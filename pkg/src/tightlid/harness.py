"""Multi-run bias/variance experiments over synthetic families.

For every swept ``d`` and run, one set is generated from stream
``(base_seed, run)``; every ``(k, estimator)`` pair is evaluated on it, per
run moments are taken over non-degenerate estimates, and an aggregate row
(``run=ALL``) averages the per-run means and standard deviations.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import logging
from dataclasses import dataclass, field, fields
from typing import List, Optional

import numpy as np

from tightlid import geometry
from tightlid.estimators import EstimateBatch, EstimatorSpec, estimate_batch
from tightlid.generators import GeneratorSpec, generate

log = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "family", "d", "k", "estimator", "run",
    "mean", "std", "min", "q1", "median", "q3", "max",
    "whisker_lo", "whisker_hi", "n_box_outliers", "n_degenerate", "n_clamped",
]
_STAT_FIELDS = ["mean", "std", "min", "q1", "median", "q3", "max", "whisker_lo", "whisker_hi"]
_COUNT_FIELDS = ["n_box_outliers", "n_degenerate", "n_clamped"]


class SliceMode(str, enum.Enum):
    ALL = "all"
    INLIERS = "inliers"
    OUTLIERS = "outliers"


@dataclass(frozen=True)
class Slice:
    mode: SliceMode = SliceMode.ALL
    fraction: float = 0.10

    def __post_init__(self):
        object.__setattr__(self, "mode", SliceMode(self.mode))
        if not 0.0 < self.fraction <= 0.5:
            raise ValueError(f"slice fraction must lie in (0, 0.5], got {self.fraction}")


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    d_values: tuple
    estimators: tuple
    runs: int = 20
    n: int = 10_000
    k_values: tuple = (20, 50, 100)
    slice: Slice = field(default_factory=Slice)
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "d_values", tuple(self.d_values))
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        ests = tuple(e if isinstance(e, EstimatorSpec) else EstimatorSpec(**e) for e in self.estimators)
        object.__setattr__(self, "estimators", ests)
        names = [e.name for e in ests]
        if len(set(names)) != len(names):
            raise ValueError("estimator names must be unique within a config")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.k_values or not self.estimators or not self.d_values:
            raise ValueError("d_values, k_values and estimators must be non-empty")
        if any(k >= self.n for k in self.k_values):
            raise ValueError(f"every k must be < n={self.n}")
        # validate the family/d combinations early
        for d in self.d_values:
            GeneratorSpec(self.family, d, self.n, self.base_seed)
        for k in self.k_values:
            for e in self.estimators:
                _with_k(e, k)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {"generator", "runs", "n", "k_values", "estimators", "slice", "base_seed"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        gen = dict(doc["generator"])
        d_values = gen.get("d")
        if d_values is None or not isinstance(d_values, list):
            d_values = [d_values]
        sl = doc.get("slice", {"mode": "all"})
        if isinstance(sl, str):
            sl = {"mode": sl}
        return cls(
            family=gen["family"],
            d_values=d_values,
            estimators=[dict(e) for e in doc["estimators"]],
            runs=int(doc.get("runs", 20)),
            n=int(doc.get("n", 10_000)),
            k_values=doc.get("k_values", [20, 50, 100]),
            slice=Slice(**sl),
            base_seed=int(doc.get("base_seed", 0)),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        ests = []
        for e in self.estimators:
            doc = e.to_dict()
            doc.pop("k")
            ests.append(doc)
        return {
            "generator": {"family": self.family, "d": list(self.d_values)},
            "runs": self.runs,
            "n": self.n,
            "k_values": list(self.k_values),
            "estimators": ests,
            "slice": {"mode": self.slice.mode.value, "fraction": self.slice.fraction},
            "base_seed": self.base_seed,
        }


def _with_k(spec: EstimatorSpec, k: int) -> EstimatorSpec:
    return EstimatorSpec(spec.method, k, spec.theta, spec.ged_pair_strategy, spec.tle_query_target)


@dataclass
class ReportRow:
    family: str
    d: int
    k: int
    estimator: str
    run: object  # int, or "ALL" for aggregates
    mean: Optional[float] = None
    std: Optional[float] = None
    min: Optional[float] = None
    q1: Optional[float] = None
    median: Optional[float] = None
    q3: Optional[float] = None
    max: Optional[float] = None
    whisker_lo: Optional[float] = None
    whisker_hi: Optional[float] = None
    n_box_outliers: int = 0
    n_degenerate: int = 0
    n_clamped: int = 0

    @property
    def is_aggregate(self) -> bool:
        return self.run == "ALL"

    @property
    def all_degenerate(self) -> bool:
        return self.mean is None

    def as_list(self):
        out = []
        for name in REPORT_COLUMNS:
            val = getattr(self, name)
            if val is None:
                out.append("")
            elif isinstance(val, float):
                out.append(repr(val))
            else:
                out.append(str(val))
        return out


def summarize(estimates, clamped=None) -> ReportRow:
    """Moments and Tukey box statistics over the non-degenerate estimates.

    Accepts an :class:`EstimateBatch` or a plain array of values (``inf``
    marks a degenerate estimate). Quartiles use linear interpolation between
    order statistics; whiskers reach the most extreme values within 1.5 IQR
    of the quartiles. Identity fields of the returned row are left blank.
    """
    if isinstance(estimates, EstimateBatch):
        values = estimates.values
        ok = estimates.ok_mask
        n_clamped = int(np.count_nonzero(estimates.clamped > 0))
    else:
        values = np.asarray(estimates, dtype=np.float64).reshape(-1)
        ok = np.isfinite(values)
        n_clamped = 0 if clamped is None else int(np.count_nonzero(np.asarray(clamped) > 0))
    row = ReportRow("", 0, 0, "", 0, n_degenerate=int(np.count_nonzero(~ok)), n_clamped=n_clamped)
    good = np.sort(values[ok])
    if good.size == 0:
        return row
    q1, med, q3 = np.percentile(good, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = good[(good >= lo_fence) & (good <= hi_fence)]
    row.mean = float(good.mean())
    row.std = float(good.std())
    row.min = float(good[0])
    row.max = float(good[-1])
    row.q1, row.median, row.q3 = float(q1), float(med), float(q3)
    row.whisker_lo = float(inside[0])
    row.whisker_hi = float(inside[-1])
    row.n_box_outliers = int(good.size - inside.size)
    return row


def _aggregate(rows: List[ReportRow]) -> ReportRow:
    first = rows[0]
    agg = ReportRow(first.family, first.d, first.k, first.estimator, "ALL")
    for name in _COUNT_FIELDS:
        setattr(agg, name, sum(getattr(r, name) for r in rows))
    live = [r for r in rows if not r.all_degenerate]
    if not live:
        return agg
    for name in _STAT_FIELDS:
        setattr(agg, name, float(np.mean([getattr(r, name) for r in live])))
    agg.min = min(r.min for r in live)
    agg.max = max(r.max for r in live)
    return agg


def select_extremes(points: geometry.PointSet, fraction: float, mode) -> np.ndarray:
    """Indices of the ``floor(fraction * n)`` points nearest to (inliers) or
    farthest from (outliers) the empirical mean; ties go to the lower index."""
    mode = SliceMode(mode)
    if not 0.0 < fraction <= 0.5:
        raise ValueError(f"fraction must lie in (0, 0.5], got {fraction}")
    count = int(np.floor(fraction * points.n))
    diff = points.coords - points.coords.mean(axis=0)
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    order = np.arange(points.n)
    if mode is SliceMode.INLIERS:
        picked = np.lexsort((order, dist))[:count]
    elif mode is SliceMode.OUTLIERS:
        picked = np.lexsort((order, -dist))[:count]
    else:
        picked = order
    return np.sort(picked)


@dataclass
class ExperimentReport:
    rows: List[ReportRow]
    config: Optional[ExperimentConfig] = None
    batches: dict = field(default_factory=dict, repr=False)

    def per_run(self, d=None, k=None, estimator=None) -> List[ReportRow]:
        return [r for r in self._match(d, k, estimator) if not r.is_aggregate]

    def aggregate(self, d, k, estimator) -> ReportRow:
        hits = [r for r in self._match(d, k, estimator) if r.is_aggregate]
        if len(hits) != 1:
            raise KeyError((d, k, estimator))
        return hits[0]

    def mean_of_means(self, d, k, estimator) -> float:
        return self.aggregate(d, k, estimator).mean

    def mean_of_stds(self, d, k, estimator) -> float:
        return self.aggregate(d, k, estimator).std

    def _match(self, d, k, estimator):
        est = getattr(estimator, "value", estimator)
        for r in self.rows:
            if (d is None or r.d == d) and (k is None or r.k == k) and (est is None or r.estimator == est):
                yield r

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in self.rows:
            writer.writerow(row.as_list())
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "ExperimentReport":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for col in REPORT_COLUMNS:
                if col not in header:
                    raise ReportSchemaError(f"{path}: missing column {col!r}", col)
            extra = [c for c in header if c not in REPORT_COLUMNS]
            if extra:
                raise ReportSchemaError(f"{path}: unexpected column {extra[0]!r}", extra[0])
            rows = []
            for raw in reader:
                vals = {}
                for f in fields(ReportRow):
                    text = raw[f.name]
                    try:
                        if f.name in ("family", "estimator"):
                            vals[f.name] = text
                        elif f.name == "run":
                            vals[f.name] = "ALL" if text == "ALL" else int(text)
                        elif f.name in ("d", "k") or f.name in _COUNT_FIELDS:
                            vals[f.name] = int(text)
                        else:
                            vals[f.name] = float(text) if text else None
                    except ValueError:
                        raise ReportSchemaError(f"{path}: bad value {text!r} in column {f.name!r}", f.name) from None
                rows.append(ReportRow(**vals))
        return cls(rows)


class ReportSchemaError(ValueError):
    def __init__(self, message, column):
        super().__init__(message)
        self.column = column


def run_experiment(config: ExperimentConfig, keep_batches: bool = False, backend=None) -> ExperimentReport:
    """Run every ``(d, run, k, estimator)`` cell of ``config``.

    Neighborhoods always come from the full set; a slice only restricts which
    points are queried. A failing cell is logged and reported as all
    degenerate rather than aborting the experiment.
    """
    cells = {}
    batches = {}
    kmax = max(config.k_values)
    for d in config.d_values:
        for run in range(config.runs):
            gspec = GeneratorSpec(config.family, d, config.n, config.base_seed, stream=run)
            points = generate(gspec)
            d_key = gspec.d
            if config.slice.mode is SliceMode.ALL:
                queries = np.arange(points.n)
            else:
                queries = select_extremes(points, config.slice.fraction, config.slice.mode)
            try:
                neighbors = geometry.knn_indices(points, points.coords[queries], kmax, exclude=queries, backend=backend)
            except Exception as exc:  # recorded per row below
                neighbors = exc
            for k in config.k_values:
                for est in config.estimators:
                    spec = _with_k(est, k)
                    try:
                        if isinstance(neighbors, Exception):
                            raise neighbors
                        batch = estimate_batch(points, spec, queries, backend=backend, neighbors=neighbors)
                        row = summarize(batch)
                        if keep_batches:
                            batches[(d_key, k, spec.name, run)] = batch
                    except Exception as exc:
                        log.warning("%s d=%s k=%s %s run %d failed: %s", config.family, d, k, spec.name, run, exc)
                        row = ReportRow("", 0, 0, "", 0, n_degenerate=int(queries.size))
                    row.family, row.d, row.k, row.estimator, row.run = config.family, d_key, k, spec.name, run
                    cells.setdefault((d_key, k, spec.name), []).append(row)
            log.info("%s d=%s run %d/%d done", config.family, d_key, run + 1, config.runs)
    rows = []
    for d in config.d_values:
        d_key = GeneratorSpec(config.family, d, config.n).d
        for k in config.k_values:
            for est in config.estimators:
                group = cells[(d_key, k, est.name)]
                rows.extend(group)
                rows.append(_aggregate(group))
    return ExperimentReport(rows, config, batches)
