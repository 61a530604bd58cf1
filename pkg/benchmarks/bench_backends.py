#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the rescaled component-averaged sweeps and the simultaneous iteration
over a size ladder of generated sparse systems. Results are checked for
bit-identity across backends while timing, so the speedup numbers also act
as a parity audit.

Usage: python benchmarks/bench_backends.py [--sizes 200,800] [--repeats 3]

The simultaneous iteration is included to show the sweep-count gap against
component averaging; on large sizes it may stop at the sweep cap, which is
itself part of the story.
"""

import argparse
import time

import numpy as np

from cadproj import (
    GeneratorConfig,
    SolverConfig,
    cad_scaled,
    dykstra_simultaneous,
    gen_constraints,
    gen_initial_point,
    kernels,
    partition,
)


def time_once(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def bench(sizes, repeats, eps):
    rows = []
    for n in sizes:
        m = int(0.75 * n)
        cfg = GeneratorConfig(n=n, m=m, d=3, seed=n)
        system = gen_constraints(cfg)
        part = partition(system)
        x0 = gen_initial_point(n, 1.0, seed=n + 1)
        scfg = SolverConfig(epsilon=eps, max_iterations=500_000)
        for name, fn in (("cad-scaled", cad_scaled), ("simultaneous", dykstra_simultaneous)):
            timings = {}
            points = {}
            for backend in kernels.available_backends():
                kernels.set_backend(backend)
                best = np.inf
                for _ in range(repeats):
                    dt, res = time_once(fn, x0, system, part, scfg)
                    best = min(best, dt)
                timings[backend] = best
                points[backend] = res.point
            if len(points) == 2 and not np.array_equal(points["native"], points["python"]):
                raise SystemExit(f"backend mismatch on n={n} {name}")
            rows.append((n, m, name, res.iterations_max, timings))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="200,800")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--eps", type=float, default=1e-6)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    rows = bench(sizes, args.repeats, args.eps)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}   eps={args.eps}")
    header = f"{'n':>6} {'m':>6} {'algorithm':<14} {'sweeps':>8}"
    for b in backends:
        header += f" {b + ' (s)':>12}"
    if len(backends) == 2:
        header += f" {'speedup':>8}"
    print(header)
    for n, m, name, iters, timings in rows:
        line = f"{n:>6} {m:>6} {name:<14} {iters:>8}"
        for b in backends:
            line += f" {timings[b]:>12.4f}"
        if len(backends) == 2:
            line += f" {timings['python'] / timings['native']:>8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
