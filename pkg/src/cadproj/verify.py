"""Randomised property suites: projection limits, Jacobian laws, clipping.

Each suite draws seeded desk-size instances, checks the relevant exact
property against the brute-force oracle or an algebraic identity, and
returns the failures with enough seed information to replay them. The CLI
and the test suite both run these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine, jacobian
from .clipping import clip, clip_chain, default_feasibility_tol
from .generate import GeneratorConfig, gen_constraints, interior_point
from .model import SparseConstraintSystem, partition as compute_partition
from .oracle import feasibility, hit_and_run, project_bruteforce

SUITES = ("theorem1", "prop1", "svc")


@dataclass
class Failure:
    suite: str
    seed: int
    message: str

    def __str__(self):
        return f"[{self.suite}] seed={self.seed}: {self.message}"


def _trial_rng(seed, trial):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(7, trial))
    )


def _random_system(rng, seed, n_max=10, m_max=8):
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    cfg = GeneratorConfig(n=n, m=m, d=3, seed=seed)
    return gen_constraints(cfg), cfg


def theorem1_suite(trials=200, seed=0, *, l_offset=0):
    """Rescaled CAD must match the orthogonal oracle, raw CAD the l-weighted one.

    ``l_offset`` perturbs the averaging counts; nonzero values exist only so
    mutation checks can confirm the suite catches a broken solver.
    """
    failures = []
    cfg = engine.SolverConfig(epsilon=1e-10, max_iterations=100_000)
    for t in range(trials):
        inst_seed = seed + t
        rng = _trial_rng(seed, t)
        system, _ = _random_system(rng, inst_seed)
        part = compute_partition(system)
        x = rng.uniform(-2.0, 2.0, system.n)

        res_scaled = engine.cad_scaled(x, system, part, cfg, _l_offset=l_offset)
        res_raw = engine.cad_raw(x, system, part, cfg, _l_offset=l_offset)
        orth = project_bruteforce(x, system)
        weighted = project_bruteforce(
            x, system, np.where(system.l > 0, system.l, 1).astype(np.float64)
        )
        err_scaled = float(np.abs(res_scaled.point - orth.point).max())
        err_raw = float(np.abs(res_raw.point - weighted.point).max())
        if not res_scaled.all_converged or err_scaled > 1e-4:
            failures.append(
                Failure(
                    "theorem1",
                    inst_seed,
                    f"rescaled CAD off by {err_scaled:.3e} "
                    f"(converged={res_scaled.all_converged})",
                )
            )
        if not res_raw.all_converged or err_raw > 1e-4:
            failures.append(
                Failure(
                    "theorem1",
                    inst_seed,
                    f"raw CAD off by {err_raw:.3e} from the weighted oracle",
                )
            )
    return failures


def hypercube_corner(n, scale=2.0):
    """The classic rank-collapse construction: x = scale*1 over {y <= 1}."""
    triplets = [(i, i, 1.0) for i in range(n)]
    system = SparseConstraintSystem(n, n, triplets, np.ones(n))
    return system, np.full(n, scale)


def _draw_differentiable(rng, system, part, attempts=25):
    """An infeasible point with an unambiguous active set, or None."""
    for attempt in range(attempts):
        # widen the draw until the instance's feasible set is escaped
        scale = 3.0 * 1.5 ** (attempt // 3)
        x = rng.uniform(-scale, scale, system.n) + rng.normal(0.0, 1e-4, system.n)
        if feasibility(x, system) < 1e-6:
            continue
        px = engine.cad_scaled(
            x, system, part, engine.SolverConfig(epsilon=1e-12, max_iterations=200_000)
        ).point
        exact = jacobian.exact_jacobian(x, system, part, projected_point=px)
        if exact.ambiguous:
            continue
        surr = jacobian.surrogate_jacobian(x, system, part, projected_point=px)
        return x, surr, exact
    return None


def _operator_checks(surr, exact, rng, n):
    msgs = []
    s_mat = surr.as_matrix()
    e_mat = exact.as_matrix()

    sv = np.linalg.svd(s_mat, compute_uv=False)
    rank = int((sv > 0.5).sum())
    expected = n if surr.direction is None else n - 1
    if rank != expected:
        msgs.append(f"surrogate rank {rank}, expected {expected}")

    for name, mat in (("surrogate", s_mat), ("exact", e_mat)):
        if np.abs(mat - mat.T).max() > 1e-8:
            msgs.append(f"{name} operator not symmetric")
        if np.abs(mat @ mat - mat).max() > 1e-7:
            msgs.append(f"{name} operator not idempotent")

    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    ev = exact.apply(v)
    align = abs(float(ev @ surr.apply(v)) - float(ev @ ev))
    if align > 1e-8:
        msgs.append(f"alignment identity off by {align:.3e}")

    n_active = len(exact.active_set) if exact.active_set is not None else 0
    diff = float(np.abs(s_mat - e_mat).max())
    if surr.direction is None or n_active == 1:
        if diff > 1e-8:
            msgs.append(f"surrogate != exact ({diff:.3e}) despite single-active/interior")
    elif diff <= 1e-6:
        msgs.append(f"surrogate == exact ({diff:.3e}) despite {n_active} active rows")
    return msgs


def _local_step_check(x, surr, exact, system, part, rng):
    cfg = engine.SolverConfig(epsilon=1e-12, max_iterations=200_000)
    v = rng.standard_normal(system.n)
    v /= np.linalg.norm(v)
    for _ in range(40):
        y_exact = engine.cad_scaled(x + exact.apply(v), system, part, cfg).point
        y_surr = engine.cad_scaled(x + surr.apply(v), system, part, cfg).point
        if np.abs(y_exact - y_surr).max() <= 1e-6:
            return None
        v = v / 2.0
        if np.linalg.norm(v) < 1e-12:
            break
    return "no step scale made exact and surrogate updates agree"


def prop1_suite(trials=100, seed=0):
    """Rank, exactness, alignment, local-equivalence and operator laws."""
    failures = []
    for t in range(trials):
        inst_seed = seed + t
        rng = _trial_rng(seed, t)
        system, _ = _random_system(rng, inst_seed, n_max=8, m_max=6)
        part = compute_partition(system)
        drawn = _draw_differentiable(rng, system, part)
        if drawn is None:
            failures.append(
                Failure("prop1", inst_seed, "could not draw a differentiable point")
            )
            continue
        x, surr, exact = drawn
        for msg in _operator_checks(surr, exact, rng, system.n):
            failures.append(Failure("prop1", inst_seed, msg))
        msg = _local_step_check(x, surr, exact, system, part, rng)
        if msg:
            failures.append(Failure("prop1", inst_seed, msg))
        if len(exact.active_set) == 1 and t % 10 == 0:
            fd = jacobian.finite_difference_jacobian(x, system, 1e-6, part)
            err = float(np.abs(fd - exact.as_matrix()).max())
            if err > 1e-5:
                failures.append(
                    Failure("prop1", inst_seed, f"finite differences off by {err:.3e}")
                )

    # interior point: both Jacobians are the identity
    rng = _trial_rng(seed, trials + 1)
    system, cfg = _random_system(rng, seed + trials + 1)
    part = compute_partition(system)
    x_in = interior_point(cfg)
    surr = jacobian.surrogate_jacobian(x_in, system, part)
    exact = jacobian.exact_jacobian(x_in, system, part)
    probe = rng.standard_normal(system.n)
    if surr.direction is not None or np.abs(surr.apply(probe) - probe).max() > 0:
        failures.append(Failure("prop1", seed + trials + 1, "interior surrogate != I"))
    if np.abs(exact.apply(probe) - probe).max() > 0:
        failures.append(Failure("prop1", seed + trials + 1, "interior exact != I"))

    # hypercube corner: exact Jacobian collapses to rank 0, surrogate does not
    system, x = hypercube_corner(4)
    part = compute_partition(system)
    exact = jacobian.exact_jacobian(x, system, part)
    surr = jacobian.surrogate_jacobian(x, system, part)
    if np.abs(exact.as_matrix()).max() > 1e-6:
        failures.append(Failure("prop1", -1, "corner exact Jacobian is not zero"))
    g = _trial_rng(seed, trials + 2).standard_normal(4)
    if np.linalg.norm(surr.apply(g)) <= 1e-6:
        failures.append(Failure("prop1", -1, "corner surrogate update vanished"))
    return failures


def svc_suite(trials=100, seed=0):
    """Feasibility, factor dominance, and mode consistency of vector clipping."""
    failures = []
    for t in range(trials):
        inst_seed = seed + t
        rng = _trial_rng(seed, t)
        # enough rows that random chords through the polytope are bounded
        # and the hit-and-run draw succeeds
        n = int(rng.integers(2, 9))
        m = 2 * n + 2
        cfg = GeneratorConfig(n=n, m=m, d=3, seed=inst_seed)
        system = gen_constraints(cfg)
        part = compute_partition(system)
        z = hit_and_run(system, interior_point(cfg), steps=20, seed=inst_seed)
        v = rng.standard_normal(n) * float(rng.uniform(0.5, 2.0))

        tol = default_feasibility_tol(system)
        rep_sparse = clip(z, v, system, part, "sparse")
        rep_std = clip(z, v, system, part, "standard")
        for rep in (rep_sparse, rep_std):
            worst = feasibility(rep.output, system)
            if worst > tol:
                failures.append(
                    Failure("svc", inst_seed, f"{rep.mode} output violates by {worst:.3e}")
                )
        alpha_c = float(rep_sparse.alphas.min())
        if np.any(rep_sparse.component_alphas < alpha_c - 1e-12):
            failures.append(Failure("svc", inst_seed, "component factor below global"))
        moved_sparse = np.abs(rep_sparse.output - z)
        moved_std = np.abs(rep_std.output - z)
        if np.any(moved_sparse < moved_std - 1e-12):
            failures.append(Failure("svc", inst_seed, "sparse mode moved less than standard"))
        if part.n_components == 1 and not np.array_equal(
            rep_sparse.output, rep_std.output
        ):
            failures.append(
                Failure("svc", inst_seed, "single component but modes disagree")
            )
        chain = clip_chain(
            z, [rng.standard_normal(n) for _ in range(3)], system, part
        )
        worst = feasibility(chain, system)
        if worst > tol:
            failures.append(Failure("svc", inst_seed, f"chain violates by {worst:.3e}"))

    # the two-component reachability witness, exact values
    system = SparseConstraintSystem(2, 2, [(0, 0, 1.0), (1, 1, 1.0)], np.array([1.0, 1.0]))
    part = compute_partition(system)
    z = np.zeros(2)
    v = np.array([2.0, 0.5])
    sparse_out = clip(z, v, system, part, "sparse").output
    std_out = clip(z, v, system, part, "standard").output
    if not (np.array_equal(sparse_out, [1.0, 0.5]) and np.array_equal(std_out, [1.0, 0.25])):
        failures.append(
            Failure("svc", -1, f"witness got sparse={sparse_out}, standard={std_out}")
        )
    return failures


def run_suite(name, trials, seed, *, l_offset=0):
    if name == "theorem1":
        return theorem1_suite(trials, seed, l_offset=l_offset)
    if name == "prop1":
        return prop1_suite(trials, seed)
    if name == "svc":
        return svc_suite(trials, seed)
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
