"""Ground-truth solvers for desk-size instances.

Weighted projections are found by enumerating active subsets and solving the
equality-constrained KKT system for each; the feasible, dual-nonnegative
candidate with minimal objective is the exact answer. Dense linear algebra is
fine here: the point of this module is correctness, not speed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .kernels import scatter

MAX_BRUTEFORCE = 12


class InfeasibleSystemError(RuntimeError):
    """No active subset produced a feasible, dual-nonnegative candidate."""


class UnboundedProblemError(RuntimeError):
    """Vertex enumeration could not certify a finite optimum."""


@dataclass
class OracleSolution:
    point: np.ndarray
    active_set: tuple
    multipliers: np.ndarray
    weighted: np.ndarray


def feasibility(x, system):
    """Exact max residual max_i (A_i . x - b_i) on the raw (unnormalised) rows."""
    x = np.asarray(x, dtype=np.float64)
    sums = scatter(system.rows, system.vals * x[system.cols], system.m)
    return float((sums - system.b).max())


def project_bruteforce(x, system, weights=None, *, feas_tol=1e-9, dual_tol=1e-9):
    """Exact weighted projection argmin sum_j w_j (y_j - x_j)^2 over Ax <= b.

    Enumerates all active subsets in lexicographic order (2^m of them, so the
    system must satisfy n, m <= 12), skipping subsets with linearly dependent
    rows; ties go to the earliest subset.
    """
    if system.n > MAX_BRUTEFORCE or system.m > MAX_BRUTEFORCE:
        raise ValueError(f"brute force limited to n, m <= {MAX_BRUTEFORCE}")
    x = np.asarray(x, dtype=np.float64)
    w = (
        np.ones(system.n)
        if weights is None
        else np.asarray(weights, dtype=np.float64)
    )
    if np.any(w <= 0):
        raise ValueError("weights must be positive")

    a = system.to_dense()
    b = system.b
    scale = 1.0 + float(np.abs(b).max())
    best = None
    best_obj = np.inf
    for r in range(system.m + 1):
        for subset in itertools.combinations(range(system.m), r):
            a_s = a[list(subset)]
            if r > 0 and np.linalg.matrix_rank(a_s) < r:
                continue
            kkt = np.zeros((system.n + r, system.n + r))
            kkt[: system.n, : system.n] = np.diag(2.0 * w)
            if r:
                kkt[: system.n, system.n:] = a_s.T
                kkt[system.n:, : system.n] = a_s
            rhs = np.concatenate([2.0 * w * x, b[list(subset)]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            y, lam = sol[: system.n], sol[system.n:]
            if np.any(lam < -dual_tol):
                continue
            if (a @ y - b).max() > feas_tol * scale:
                continue
            obj = float(w @ (y - x) ** 2)
            if obj < best_obj - 1e-15:
                best_obj = obj
                best = OracleSolution(
                    point=y,
                    active_set=subset,
                    multipliers=np.maximum(lam, 0.0),
                    weighted=w,
                )
    if best is None:
        raise InfeasibleSystemError("no feasible KKT candidate; system infeasible?")
    return best


def hit_and_run(system, start, steps, seed, *, max_retries=64):
    """Random feasible point after ``steps`` hit-and-run moves from ``start``.

    Each move samples a uniform direction, finds the feasible chord through
    the current point with the halfspace scaling factors, and jumps to a
    uniform point on it. Directions with an unbounded chord are resampled.
    """
    z = np.asarray(start, dtype=np.float64).copy()
    if feasibility(z, system) >= 0:
        raise ValueError("hit-and-run start must be strictly feasible")
    rng = np.random.default_rng(seed)
    a = system.to_dense()
    for _ in range(steps):
        for attempt in range(max_retries):
            d = rng.standard_normal(system.n)
            d /= np.linalg.norm(d)
            ad = a @ d
            slack = system.b - a @ z
            fwd = np.inf
            back = np.inf
            pos = ad > 1e-14
            neg = ad < -1e-14
            if pos.any():
                fwd = float((slack[pos] / ad[pos]).min())
            if neg.any():
                back = float((slack[neg] / -ad[neg]).min())
            if np.isfinite(fwd) and np.isfinite(back):
                break
        else:
            raise UnboundedProblemError(
                "could not sample a bounded chord; polytope unbounded?"
            )
        t = rng.uniform(-back, fwd)
        z = z + t * d
    return z


def lp_vertex_optimum(system, c, *, feas_tol=1e-9, cert_tol=1e-7):
    """Exact optimum of max c.x over Ax <= b by vertex enumeration.

    Only vertices (full-rank n-subsets of rows) are candidates, so m >= n is
    required; the winner must carry a nonnegative-combination certificate
    A_S^T lam = c, otherwise the problem is unbounded or degenerate and an
    :class:`UnboundedProblemError` is raised.
    """
    c = np.asarray(c, dtype=np.float64)
    if system.m < system.n:
        raise UnboundedProblemError("fewer constraints than variables; no vertices")
    a = system.to_dense()
    b = system.b
    scale = 1.0 + float(np.abs(b).max())
    best_val = -np.inf
    best_vertex = None
    best_subset = None
    for subset in itertools.combinations(range(system.m), system.n):
        a_s = a[list(subset)]
        try:
            y = np.linalg.solve(a_s, b[list(subset)])
        except np.linalg.LinAlgError:
            continue
        if (a @ y - b).max() > feas_tol * scale:
            continue
        val = float(c @ y)
        if val > best_val:
            best_val = val
            best_vertex = y
            best_subset = subset
    if best_vertex is None:
        raise InfeasibleSystemError("no feasible vertex found")
    lam, resid = nnls(a[list(best_subset)].T, c)
    if resid > cert_tol * (1.0 + float(np.linalg.norm(c))):
        raise UnboundedProblemError("best vertex lacks an optimality certificate")
    return best_val, best_vertex
