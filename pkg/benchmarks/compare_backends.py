"""Throughput comparison between the compiled and interpreted kernels.

Runs the same three workloads against both backends in one process and
reports instances per second plus the speedup:

    python benchmarks/compare_backends.py [--scale 1.0] [--seed 1]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from streamforest._backend import core, load_interpreted
from streamforest.streams import make_stream


def _instances(n: int, seed: int):
    xs, ys = [], []
    for inst in make_stream("sea", seed=seed).take(n):
        xs.append(inst.x)
        ys.append(inst.y)
    return xs, ys


def bench_adwin(module, n: int, seed: int) -> float:
    rng = module.Rng(seed)
    values = [rng.next_float() for _ in range(n)]
    det = module.Adwin(0.002)
    start = time.perf_counter()
    for v in values:
        det.add(v)
    return n / (time.perf_counter() - start)


def bench_tree(module, n: int, seed: int) -> float:
    xs, ys = _instances(n, seed)
    tree = module.Tree(2, np.zeros(3, dtype=np.int32), 3, seed=seed)
    out = np.empty(2)
    start = time.perf_counter()
    for x, y in zip(xs, ys):
        tree.predict_proba(x, out)
        tree.train(x, y, 1.0)
    return n / (time.perf_counter() - start)


def bench_forest(module, n: int, seed: int) -> float:
    xs, ys = _instances(n, seed)
    forest = module.Forest(2, np.zeros(3, dtype=np.int32), 10, 2, seed=seed)
    out = np.empty(2)
    start = time.perf_counter()
    for x, y in zip(xs, ys):
        forest.predict_then_train(x, y, True, out)
    return n / (time.perf_counter() - start)


WORKLOADS = (
    ("adwin", bench_adwin, 100_000),
    ("tree", bench_tree, 20_000),
    ("forest", bench_forest, 4_000),
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", type=float, default=1.0,
                        help="multiply every workload size")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args(argv)

    interpreted = load_interpreted()
    if not core.COMPILED:
        print("compiled extension not built; timing the interpreted kernel only")
        for name, fn, base in WORKLOADS:
            n = max(1, int(base * args.scale))
            print("%-8s %12.0f inst/s  (n=%d)" % (name, fn(interpreted, n, args.seed), n))
        return 0

    print("%-8s %15s %15s %9s" % ("workload", "compiled/s", "interpreted/s", "speedup"))
    for name, fn, base in WORKLOADS:
        n = max(1, int(base * args.scale))
        fast = fn(core, n, args.seed)
        slow = fn(interpreted, n, args.seed)
        print("%-8s %15.0f %15.0f %8.1fx" % (name, fast, slow, fast / slow))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
