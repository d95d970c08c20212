"""Time the compiled kernel against the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--boxes 200]

Each row reports the best-of-``repeat`` time per call for both backends and
the speedup of the compiled one.  The last rows time complete solver runs.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
import time

from certopt import benchmarks, tape
from certopt.ibc import IBCSolver

CASES = [("rana", 5), ("egg_holder", 5), ("michalewicz", 10), ("keane", 5), ("shekel", 5)]
SOLVES = [("michalewicz", 3), ("rana", 2)]


def random_boxes(p, count, seed=0):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        lo, hi = [], []
        for a, b in zip(p.domain.lo, p.domain.hi):
            w = (b - a) * rng.choice([1.0, 0.1, 0.001])
            s = rng.uniform(a, b - w)
            lo.append(s)
            hi.append(s + w)
        out.append((lo, hi))
    return out


def best_time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_ops(p, backend, boxes):
    fk = p.objective.tape.with_backend(backend).kernel
    cks = [c.body.tape.with_backend(backend).kernel for c in p.constraints]
    proc = tape.processor_class(backend)(fk, cks, p.domain.lo, p.domain.hi)
    pts = [[0.5 * (a + b) for a, b in zip(lo, hi)] for lo, hi in boxes]

    def fwd():
        for lo, hi in boxes:
            fk.forward(lo, hi)

    def grad():
        for lo, hi in boxes:
            fk.gradient(lo, hi)

    def rev():
        for lo, hi in boxes:
            fk.revise(list(lo), list(hi), -math.inf, 0.0)

    def flt():
        for x in pts:
            fk.eval_float(x)

    def proc_all():
        for lo, hi in boxes:
            proc.process(list(lo), list(hi), -math.inf, math.inf, 1e-6)

    return {"forward": fwd, "gradient": grad, "revise": rev, "eval_float": flt,
            "process": proc_all}


def solve(name, n, backend):
    p = benchmarks.make_problem(name, n)
    p.objective.tape.kernel = p.objective.tape.with_backend(backend).kernel
    for c in p.constraints:
        c.body.tape.kernel = c.body.tape.with_backend(backend).kernel
    return lambda: IBCSolver(p).run()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--boxes", type=int, default=200)
    ap.add_argument("--no-solve", action="store_true", help="skip the full solver runs")
    args = ap.parse_args(argv)

    if "cython" not in tape.available_backends():
        print("compiled kernel not built; nothing to compare", file=sys.stderr)
        return 1

    print(f"{'case':<18}{'operation':<12}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, n in CASES:
        p = benchmarks.make_problem(name, n)
        boxes = random_boxes(p, args.boxes)
        py, cy = kernel_ops(p, "python", boxes), kernel_ops(p, "cython", boxes)
        for op in py:
            tp = best_time(py[op], args.repeat) / len(boxes)
            tc = best_time(cy[op], args.repeat) / len(boxes)
            print(f"{name + ' ' + str(n):<18}{op:<12}{tp * 1e6:>10.1f}us{tc * 1e6:>10.1f}us"
                  f"{tp / tc:>9.1f}x")
    if not args.no_solve:
        for name, n in SOLVES:
            tp = best_time(solve(name, n, "python"), 1)
            tc = best_time(solve(name, n, "cython"), 1)
            print(f"{name + ' ' + str(n):<18}{'solve':<12}{tp:>11.2f}s{tc:>11.2f}s"
                  f"{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
