"""Command-line entry point: instance generation, projection benchmarking,
property verification, and projected-gradient descent runs.

Every command is seeded and emits machine-readable output (JSON instances,
fixed-header CSV records); rerunning with the same flags reproduces the same
bytes apart from the runtime column.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import engine, verify
from .descent import DescentConfig, descend, objective_eval, write_trace_csv
from .generate import (
    FAMILIES,
    GeneratorConfig,
    gen_initial_point,
    gen_instance,
    load_instance,
)
from .model import partition as compute_partition
from .oracle import MAX_BRUTEFORCE, project_bruteforce

CSV_HEADER = (
    "instance_id,family,n,m,d,delta,method,epsilon,iterations,"
    "runtime_ms,violation,objective,converged,seed"
)

ALG_MAP = {
    "cad": "cad-scaled",
    "cad-raw": "cad-raw",
    "simul": "simultaneous",
    "two-set": "two-set",
}


def _out_dir(path_arg):
    base = Path(path_arg if path_arg is not None else os.environ.get("CADPROJ_OUT", "."))
    base.mkdir(parents=True, exist_ok=True)
    return base


def _run_seed(base, instance_index, repeat):
    ss = np.random.SeedSequence(entropy=base, spawn_key=(instance_index, repeat))
    return int(ss.generate_state(1)[0])


def cmd_gen(args):
    if args.family == "power":
        if args.m is not None:
            print("gen: --m is derived for the power family; do not pass it", file=sys.stderr)
            return 2
        m = 3 * args.n
    else:
        if args.m is None:
            print("gen: --m is required for this family", file=sys.stderr)
            return 2
        m = args.m
    out = _out_dir(args.out)
    from .generate import save_instance

    for k in range(args.count):
        seed = args.seed + k
        cfg = GeneratorConfig(
            n=args.n, m=m, d=args.d, delta=args.delta, offset=not args.no_offset,
            seed=seed,
        )
        inst = gen_instance(args.family, cfg)
        path = out / f"{args.family}_n{args.n}_m{m}_d{args.d}_seed{seed}.json"
        save_instance(inst, path)
        print(path)
    return 0


def _format_record(rec):
    objective = "" if rec["objective"] is None else repr(rec["objective"])
    return ",".join(
        [
            rec["instance_id"],
            rec["family"],
            str(rec["n"]),
            str(rec["m"]),
            str(rec["d"]),
            repr(rec["delta"]),
            rec["method"],
            repr(rec["epsilon"]),
            str(rec["iterations"]),
            repr(rec["runtime_ms"]),
            repr(rec["violation"]),
            objective,
            "true" if rec["converged"] else "false",
            str(rec["seed"]),
        ]
    )


def _project_one(inst, instance_id, idx, repeat, args, part):
    seed = _run_seed(args.seed, idx, repeat)
    x0 = gen_initial_point(inst.system.n, args.delta, seed)
    cfg = engine.SolverConfig(
        epsilon=args.eps,
        max_iterations=args.max_iters,
        algorithm=ALG_MAP[args.alg],
    )
    t0 = time.perf_counter()
    res = engine.project(x0, inst.system, cfg, part)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    objective = None
    if inst.objective is not None:
        try:
            objective = objective_eval(inst, res.point)[0]
        except ValueError:
            objective = None
    record = {
        "instance_id": instance_id,
        "family": inst.family,
        "n": inst.system.n,
        "m": inst.system.m,
        "d": inst.d,
        "delta": args.delta,
        "method": args.alg,
        "epsilon": args.eps,
        "iterations": res.iterations_max,
        "runtime_ms": runtime_ms,
        "violation": res.violation,
        "objective": objective,
        "converged": res.all_converged,
        "seed": seed,
    }
    return record, x0, res.point


def cmd_project(args):
    paths = sorted(Path(p) for p in args.instances)
    instances = [(p.stem, load_instance(p)) for p in paths]
    partitions = [compute_partition(inst.system) for _, inst in instances]

    tasks = [
        (idx, rep)
        for idx in range(len(instances))
        for rep in range(args.repeats)
    ]

    def run(task):
        idx, rep = task
        iid, inst = instances[idx]
        return task, _project_one(inst, iid, idx, rep, args, partitions[idx])

    results = {}
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            for task, payload in pool.map(run, tasks):
                results[task] = payload
    else:
        for task in tasks:
            results[task] = run(task)[1]

    lines = [CSV_HEADER]
    points = []
    for task in tasks:  # already sorted by (instance, repeat)
        record, x0, point = results[task]
        lines.append(_format_record(record))
        points.append(
            {
                "instance_id": record["instance_id"],
                "repeat": task[1],
                "seed": record["seed"],
                "point": [float(v) for v in point],
            }
        )
    text = "\n".join(lines) + "\n"
    if args.csv:
        Path(args.csv).write_text(text)
        print(f"wrote {len(tasks)} records to {args.csv}")
    else:
        sys.stdout.write(text)
    if args.points_out:
        Path(args.points_out).write_text(json.dumps(points, indent=1) + "\n")

    if args.verify:
        worst = 0.0
        for (idx, rep) in tasks:
            iid, inst = instances[idx]
            if inst.system.n > MAX_BRUTEFORCE or inst.system.m > MAX_BRUTEFORCE:
                print(f"verify: {iid} too large for the oracle", file=sys.stderr)
                return 2
            record, x0, point = results[(idx, rep)]
            weights = None
            if args.alg == "cad-raw":
                weights = np.where(
                    inst.system.l > 0, inst.system.l, 1
                ).astype(np.float64)
            reference = project_bruteforce(x0, inst.system, weights).point
            worst = max(worst, float(np.abs(point - reference).max()))
        print(f"verify: max |point - oracle| = {worst:.3e}")
        if worst > args.verify_tol:
            return 1
    return 0


def cmd_verify(args):
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    l_offset = 1 if args.self_test_tamper else 0
    exit_code = 0
    for name in names:
        failures = verify.run_suite(
            name, args.trials, args.seed,
            l_offset=l_offset if name == "theorem1" else 0,
        )
        status = "PASS" if not failures else f"FAIL ({len(failures)} failures)"
        print(f"suite {name}: {status}")
        for f in failures:
            print(f"  {f}")
        if failures:
            exit_code = 1
    return exit_code


def cmd_descend(args):
    out = _out_dir(args.out)
    grads = ["surrogate", "exact"] if args.grad == "both" else [args.grad]
    for k in range(args.count):
        seed = args.seed + k
        if args.instance:
            inst = load_instance(args.instance)
            label = Path(args.instance).stem
        else:
            if args.m is None and args.family != "power":
                print("descend: --m is required when generating", file=sys.stderr)
                return 2
            m = 3 * args.n if args.family == "power" else args.m
            cfg = GeneratorConfig(n=args.n, m=m, d=args.d, seed=seed)
            inst = gen_instance(args.family, cfg)
            label = f"{args.family}_seed{seed}"
        for grad in grads:
            dcfg = DescentConfig(
                gradient_kind=grad,
                eta=args.eta,
                iterations=args.steps,
                c_h=args.ch,
                svc_steps=args.svc_steps,
                seed=seed,
                epsilon=args.eps,
            )
            trace = descend(inst, dcfg)
            path = out / f"trace_{label}_{grad}.csv"
            write_trace_csv(trace, path)
            final = float(trace.objective[-1]) if trace.steps else float("nan")
            flag = " (truncated)" if trace.truncated else ""
            print(f"{path}: steps={trace.steps} final_objective={final!r}{flag}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cadproj",
        description="Sparse polytope projections: generate, project, verify, descend.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate instance files")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--no-offset", action="store_true",
                   help="b = max(As, 0.1): origin-centred 0.1-ball feasible")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("project", help="project random points onto instances")
    p.add_argument("instances", nargs="+")
    p.add_argument("--alg", choices=sorted(ALG_MAP), default="cad")
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=100_000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv")
    p.add_argument("--points-out")
    p.add_argument("--verify", action="store_true",
                   help="compare against the brute-force oracle (small instances)")
    p.add_argument("--verify-tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--self-test-tamper", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("descend", help="projected-gradient descent traces")
    p.add_argument("--instance")
    p.add_argument("--family", choices=FAMILIES[1:], default="lp")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--grad", choices=("surrogate", "exact", "both"), default="surrogate")
    p.add_argument("--ch", type=float, default=0.0)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--svc-steps", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_descend)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
