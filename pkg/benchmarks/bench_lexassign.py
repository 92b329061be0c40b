#!/usr/bin/env python3
"""Time the compiled assignment kernel against the numpy fallback on priority weight arrays."""
from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from threshmatch import engine
from threshmatch.generate import gen_random_instance
from threshmatch.model import PriorityKind


def _time(fn, repeats: int) -> float:
    runs = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - start)
    return statistics.median(runs)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40, 80])
    parser.add_argument("--kind", default="fair", choices=[k.value for k in PriorityKind])
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--skip-python-above", type=int, default=120,
                        help="skip the fallback for larger n (it is slow)")
    args = parser.parse_args(argv)

    if engine.BACKEND != "compiled":
        print("compiled kernel unavailable; only the fallback will be timed", file=sys.stderr)
    kind = PriorityKind(args.kind)
    print(f"{'n':>5} {'compiled_s':>12} {'python_s':>12} {'speedup':>9} {'same':>5}")
    for n in args.sizes:
        inst = gen_random_instance([args.seed, n], n, tie_prob=0.2, acceptability_prob=0.6)
        values = np.random.default_rng([args.seed, n, 1]).random((n, n))
        weight, real = engine.priority_weight_array(inst, kind, values)
        results = {}
        timings = {}
        backends = ["compiled"] if engine.BACKEND == "compiled" else []
        if n <= args.skip_python_above:
            backends.append("python")
        for b in backends:
            results[b] = engine.solve_assignment(weight, real, backend=b)
            timings[b] = _time(lambda b=b: engine.solve_assignment(weight, real, backend=b), args.repeats)
        c, p = timings.get("compiled"), timings.get("python")
        same = "-" if len(results) < 2 else str(bool(np.array_equal(*results.values())))
        speed = f"{p / c:9.1f}" if c and p else f"{'-':>9}"
        fmt = lambda t: f"{t:12.4f}" if t is not None else f"{'-':>12}"  # noqa: E731
        print(f"{n:5d} {fmt(c)} {fmt(p)} {speed} {same:>5}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
