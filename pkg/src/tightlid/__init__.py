"""Tight local intrinsic dimensionality estimation.

Estimators of local intrinsic dimensionality (LID) for small neighborhoods,
built on moving-center adjusted distances between pairs of neighbors, plus
the usual comparators (MLE, MoM, ED, GED, LCD, LPCA), synthetic benchmark
generators and an experiment harness.
"""
from tightlid._backend import BACKEND, set_threads
from tightlid.estimators import (
    Estimate,
    EstimateBatch,
    EstimatorSpec,
    GedStrategy,
    Method,
    Status,
    estimate,
    estimate_batch,
    estimate_ed,
    estimate_ged,
    estimate_global_pca,
    estimate_lcd,
    estimate_lpca,
    estimate_mle,
    estimate_mom,
    estimate_tle,
)
from tightlid.generators import GeneratorSpec, generate, ground_truth_id
from tightlid.geometry import InsufficientSampleError, Metric, Neighborhood, PointSet, knn, pairwise_distances
from tightlid.harness import ExperimentConfig, ExperimentReport, Slice, run_experiment, select_extremes, summarize
from tightlid.moving_center import AdjustedDistanceResult, Case, adjusted_distance, reflect

__version__ = "0.1.0"
