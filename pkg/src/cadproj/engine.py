"""Dykstra-family projection algorithms onto sparse polytopes.

Three algorithms over ``Ax <= b``: two-set Dykstra (arbitrary projection
callables), simultaneous Dykstra (product-space average over all constraints)
and component-averaged Dykstra in raw and rescaled form. The raw variant
converges to the count-weighted projection argmin sum_j l_j (y_j - x_j)^2;
the rescaled variant changes variables by sqrt(l) so the same sweeps yield
the orthogonal projection.

Each independent constraint component runs with its own stopping condition
(primal feasibility ``max(Ax - b) <= eps`` on the solver's row-normalised
system) and its own iteration count; components are numerically decoupled,
so sequential and concurrent execution give bit-identical results.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import partition as compute_partition

_log = logging.getLogger(__name__)

ALGORITHMS = ("two-set", "simultaneous", "cad-raw", "cad-scaled")


@dataclass(frozen=True)
class SolverConfig:
    """Tolerance, iteration cap, and algorithm selection for one projection."""

    epsilon: float = 1e-8
    max_iterations: int = 100_000
    algorithm: str = "cad-scaled"
    record_distance: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")


@dataclass
class ProjectionResult:
    """Converged point plus per-component diagnostics.

    ``iterations`` and ``converged`` have one entry per independent component
    (a single entry for two-set runs). ``violation`` is the stopping metric at
    exit: max row residual on the solver's normalised system, or the last
    iterate displacement for two-set runs. ``dual`` is input minus point.
    """

    point: np.ndarray
    iterations: np.ndarray
    violation: float
    converged: np.ndarray
    dual: np.ndarray
    distance_history: tuple | None = None

    @property
    def all_converged(self):
        return bool(self.converged.all())

    @property
    def iterations_max(self):
        return int(self.iterations.max())


def project_halfspace(x, a, b):
    """Closed-form projection of ``x`` onto ``{y : a . y <= b}``.

    Only coordinates where ``a`` is nonzero change; feasible points are fixed.
    """
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    sq = float(a @ a)
    if not sq > 0:
        raise ValueError("cannot project onto a halfspace with a zero-norm row")
    t = (b - float(a @ x)) / sq
    if t >= 0:
        return x.copy()
    return x + t * a


def _check_monotone(histories, algorithm):
    # Appendix-style soft check: observed, not proved, so log instead of fail.
    for k, h in enumerate(histories):
        if h is None or h.size < 2:
            continue
        drop = np.diff(h).min()
        if drop < -1e-9 * (1.0 + float(h.max())):
            _log.warning(
                "%s: input-distance sequence decreased by %.3e in component %d",
                algorithm,
                -drop,
                k,
            )


def _run_blocks(x, system, part, cfg, mode, l_offset=0):
    """Run one kernel per independent component and reassemble the point.

    ``l_offset`` is a mutation-test hook that perturbs the averaging counts;
    it must stay 0 in real use.
    """
    impl = kernels.get_impl()
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (system.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({system.n},)")
    if not np.all(system.row_norms > 0):
        raise ValueError("system has empty, zero-norm, or non-finite rows")

    out = x.copy()
    n_comp = part.n_components
    iters = np.zeros(n_comp, dtype=np.int64)
    conv = np.ones(n_comp, dtype=bool)
    viols = np.full(n_comp, -np.inf)
    histories = []
    comp_of_entry = part.labels[system.rows]
    l_full = system.l.astype(np.float64)

    for k in range(n_comp):
        sel = comp_of_entry == k
        comp_rows = part.components[k]
        lrow = np.searchsorted(comp_rows, system.rows[sel])
        var_ids = np.nonzero(part.variable_components == k)[0]
        lcol = np.searchsorted(var_ids, system.cols[sel])
        e_vals = system.vals[sel]
        bk = system.b[comp_rows]
        lk = l_full[var_ids] + l_offset

        if mode == "cad-scaled":
            sq = np.sqrt(lk)
            e_vals = e_vals * sq[lcol]
            xk = x[var_ids] / sq
        else:
            xk = x[var_ids]
        norms = np.sqrt(
            np.bincount(lrow, weights=e_vals * e_vals, minlength=comp_rows.size)
        )
        vn = e_vals / norms[lrow]
        bn = bk / norms

        if mode == "simultaneous":
            xb, it, ok, viol, hist = impl.simultaneous_block(
                lrow, lcol, vn, bn, xk, float(system.m), cfg.epsilon,
                cfg.max_iterations, cfg.record_distance,
            )
        else:
            xb, it, ok, viol, hist = impl.cad_block(
                lrow, lcol, vn, bn, xk, lk, cfg.epsilon,
                cfg.max_iterations, cfg.record_distance,
            )
        if mode == "cad-scaled":
            xb = xb * sq
        out[var_ids] = xb
        iters[k] = it
        conv[k] = ok
        viols[k] = viol
        histories.append(hist)

    if cfg.record_distance:
        _check_monotone(histories, mode)
    return ProjectionResult(
        point=out,
        iterations=iters,
        violation=float(viols.max()),
        converged=conv,
        dual=x - out,
        distance_history=tuple(histories) if cfg.record_distance else None,
    )


def cad_scaled(x, system, partition=None, cfg=None, *, _l_offset=0):
    """Orthogonal projection of ``x`` onto ``{y : Ay <= b}`` via rescaled CAD."""
    cfg = cfg or SolverConfig()
    part = partition if partition is not None else compute_partition(system)
    return _run_blocks(x, system, part, cfg, "cad-scaled", l_offset=_l_offset)


def cad_raw(x, system, partition=None, cfg=None, *, _l_offset=0):
    """Count-weighted projection argmin sum_j l_j (y_j - x_j)^2 via raw CAD."""
    cfg = cfg or SolverConfig()
    part = partition if partition is not None else compute_partition(system)
    return _run_blocks(x, system, part, cfg, "cad-raw", l_offset=_l_offset)


def dykstra_simultaneous(x, system, partition=None, cfg=None):
    """Orthogonal projection via the product-space (simultaneous) iteration."""
    cfg = cfg or SolverConfig()
    part = partition if partition is not None else compute_partition(system)
    return _run_blocks(x, system, part, cfg, "simultaneous")


def dykstra_two_set(x, project_first, project_second, cfg=None):
    """Two-set Dykstra iteration over arbitrary projection callables.

    Stops when neither projection moves the iterate by more than
    ``cfg.epsilon`` (sup norm) over a full sweep; with halfspace callables
    this coincides with primal feasibility of both sets.
    """
    cfg = cfg or SolverConfig()
    x0 = np.asarray(x, dtype=np.float64).copy()
    x_cur = x0.copy()
    p = np.zeros_like(x0)
    q = np.zeros_like(x0)
    converged = False
    delta = np.inf
    it = 0
    hist = [] if cfg.record_distance else None
    while it < cfg.max_iterations:
        w = x_cur + p
        y = project_first(w)
        p = w - y
        u = y + q
        x_next = project_second(u)
        q = u - x_next
        delta = max(
            float(np.abs(y - x_next).max(initial=0.0)),
            float(np.abs(x_next - x_cur).max(initial=0.0)),
        )
        x_cur = x_next
        it += 1
        if cfg.record_distance:
            hist.append(float(np.linalg.norm(x_cur - x0)))
        if delta <= cfg.epsilon:
            converged = True
            break
    histories = (np.array(hist),) if cfg.record_distance else None
    if cfg.record_distance:
        _check_monotone(histories, "two-set")
    return ProjectionResult(
        point=x_cur,
        iterations=np.array([it], dtype=np.int64),
        violation=delta,
        converged=np.array([converged]),
        dual=x0 - x_cur,
        distance_history=histories,
    )


def halfspace_callable(system, i):
    """Projection callable for constraint ``i`` of a system (support-sparse)."""
    idx, vals, b_i = system.row(i)
    sq = float(vals @ vals)
    if not sq > 0:
        raise ValueError(f"row {i} has zero norm")

    def proj(x):
        t = (b_i - float(vals @ x[idx])) / sq
        if t >= 0:
            return np.asarray(x, dtype=np.float64).copy()
        y = np.asarray(x, dtype=np.float64).copy()
        y[idx] = y[idx] + t * vals
        return y

    return proj


def project(x, system, cfg=None, partition=None):
    """Dispatch on ``cfg.algorithm``; two-set requires exactly two constraints."""
    cfg = cfg or SolverConfig()
    if cfg.algorithm == "cad-scaled":
        return cad_scaled(x, system, partition, cfg)
    if cfg.algorithm == "cad-raw":
        return cad_raw(x, system, partition, cfg)
    if cfg.algorithm == "simultaneous":
        return dykstra_simultaneous(x, system, partition, cfg)
    if system.m != 2:
        raise ValueError("two-set algorithm needs a system with exactly 2 constraints")
    return dykstra_two_set(
        x, halfspace_callable(system, 0), halfspace_callable(system, 1), cfg
    )
