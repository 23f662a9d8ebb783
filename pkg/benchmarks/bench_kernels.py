"""Benchmark the compiled mining kernels against their numpy twins.

Runs both builds of the split-search and tree-routing kernels on the
same inputs, checks they agree, and prints a timing table.  Compile
time is excluded by a warm-up call.  Usage:

    python3 benchmarks/bench_kernels.py --rows 20000 --queries 200000
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from warden.mining.kernels import (
    best_split_numpy,
    jit_kernels,
    route_tree_numpy,
)
from warden.mining.tree import build_tree
from warden.preprocess import LabeledDataset


def synthetic_problem(rows: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Two informative features with a noisy axis-aligned boundary."""
    rng = np.random.default_rng(seed)
    X = np.column_stack(
        [
            rng.uniform(18.0, 60.0, rows),
            rng.uniform(15000.0, 150000.0, rows),
        ]
    )
    y = ((X[:, 0] >= 40.0) | (X[:, 1] >= 120000.0)).astype(np.int64)
    flip = rng.random(rows) < 0.1
    y[flip] = 1 - y[flip]
    return np.ascontiguousarray(X), y


def best_of(repeats: int, fn, *args) -> float:
    """Best wall time in seconds over the given number of runs."""
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=20000, help="rows for the split search")
    parser.add_argument("--queries", type=int, default=200000, help="rows routed through the tree")
    parser.add_argument("--repeats", type=int, default=5, help="timed runs per kernel; best is kept")
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args(argv)

    X, y = synthetic_problem(args.rows, args.seed)
    feats = np.arange(X.shape[1], dtype=np.int64)
    try:
        split_jit, route_jit = jit_kernels()
    except ImportError:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1

    split_jit(X, y, feats)
    if tuple(split_jit(X, y, feats)) != tuple(best_split_numpy(X, y, feats)):
        print("kernel mismatch: split results differ between builds", file=sys.stderr)
        return 1

    train = LabeledDataset(X[:2000], y[:2000], ("Age", "EstimatedSalary"))
    flat = build_tree(train).flattened()
    queries, _ = synthetic_problem(args.queries, args.seed + 1)
    route_jit(*flat, queries)
    if not np.array_equal(route_jit(*flat, queries), route_tree_numpy(*flat, queries)):
        print("kernel mismatch: routing results differ between builds", file=sys.stderr)
        return 1

    rows = [
        ("split search", "numpy", best_of(args.repeats, best_split_numpy, X, y, feats)),
        ("split search", "numba", best_of(args.repeats, split_jit, X, y, feats)),
        ("tree routing", "numpy", best_of(args.repeats, route_tree_numpy, *flat, queries)),
        ("tree routing", "numba", best_of(args.repeats, route_jit, *flat, queries)),
    ]
    baselines = {name: t for name, backend, t in rows if backend == "numpy"}

    print(f"rows={args.rows} queries={args.queries} repeats={args.repeats} (best run kept)")
    print(f"{'kernel':<14} {'backend':<8} {'best ms':>10} {'speedup':>9}")
    for name, backend, seconds in rows:
        speedup = baselines[name] / seconds
        print(f"{name:<14} {backend:<8} {seconds * 1000.0:>10.3f} {speedup:>8.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
