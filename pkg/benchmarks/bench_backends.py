"""Time the numba kernels against the pure-numpy fallback on one data set.

    python benchmarks/bench_backends.py --n 4000 --d 8 --k 20

Prints per-stage wall times and checks that both paths give identical output.
"""
import argparse
import time

import numpy as np

from tightlid import _backend
from tightlid.estimators import EstimatorSpec, Method, estimate_batch
from tightlid.generators import GeneratorSpec, generate
from tightlid.geometry import knn_indices

STAGES = ["knn", "mle", "tle", "tle-c", "lcd"]


def run_stage(stage, points, k, backend):
    if stage == "knn":
        ids = np.arange(points.n)
        return knn_indices(points, points.coords, k, exclude=ids, backend=backend)[1]
    return estimate_batch(points, EstimatorSpec(Method(stage), k=k), backend=backend).values


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="gaussian")
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--d", type=int, default=8)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    points = generate(GeneratorSpec(args.family, d=args.d, n=args.n, seed=1))
    backends = ["numba", "numpy"] if _backend.NUMBA_AVAILABLE else ["numpy"]
    print(f"{args.family} n={args.n} d={args.d} k={args.k}, best of {args.repeat}")
    print(f"{'stage':<8}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}  identical")
    for stage in STAGES:
        # warm-up compiles the numba kernels outside the timed region
        run_stage(stage, generate(GeneratorSpec(args.family, d=args.d, n=args.k + 5, seed=2)), args.k, backends[0])
        results = {b: best_of(lambda b=b: run_stage(stage, points, args.k, b), args.repeat) for b in backends}
        cells = "".join(f"{results[b][0]:>11.3f}s" for b in backends)
        if len(backends) == 2:
            speedup = results["numpy"][0] / results["numba"][0]
            same = np.array_equal(results["numba"][1], results["numpy"][1])
            print(f"{stage:<8}{cells}{speedup:>9.1f}x  {same}")
        else:
            print(f"{stage:<8}{cells}")


if __name__ == "__main__":
    main()
