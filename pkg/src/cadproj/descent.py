"""Projected-objective ascent on a free parameter point.

Optimises f(P_C(w)) over an unconstrained w: project, differentiate through
the projection with either the exact or the surrogate Jacobian, and step.
A penalty pull c_h (w - P_C(w)) keeps w near the feasible set, trading a
little objective for much cheaper projections. Optional clipping layers
refine the projected point along the objective gradient before it is scored.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import engine, jacobian
from .clipping import clip, default_feasibility_tol
from .generate import (
    LinearObjective,
    QuadraticObjective,
    TransmitPowerObjective,
    capacities,
    gen_initial_point,
)
from .model import partition as compute_partition
from .oracle import feasibility

GRADIENT_KINDS = ("surrogate", "exact")

# transmit-power capacities are undefined for negative powers; tiny
# projection-tolerance undershoots are clamped, real violations raise
DOMAIN_TOL = 1e-6

TRACE_COLUMNS = ("iteration", "objective", "violation", "dual_norm", "cad_iters")


@dataclass(frozen=True)
class DescentConfig:
    gradient_kind: str = "surrogate"
    eta: float = 0.05
    iterations: int = 100
    c_h: float = 0.0
    svc_steps: int = 0
    seed: int = 0
    epsilon: float = 1e-8
    max_iterations: int = 50_000
    decay: bool = False

    def __post_init__(self):
        if self.gradient_kind not in GRADIENT_KINDS:
            raise ValueError(f"gradient_kind must be one of {GRADIENT_KINDS}")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.c_h < 0:
            raise ValueError("c_h must be >= 0")


@dataclass
class Trace:
    objective: np.ndarray
    violation: np.ndarray
    dual_norm: np.ndarray
    cad_iters: np.ndarray
    final_point: np.ndarray | None
    truncated: bool = False

    @property
    def steps(self):
        return self.objective.size

    def best_objective(self):
        return float(self.objective.max()) if self.steps else -np.inf


def objective_eval(instance, x):
    """Objective value and analytic gradient at a feasible point."""
    x = np.asarray(x, dtype=np.float64)
    obj = instance.objective
    if obj is None:
        raise ValueError("instance has no objective")
    if isinstance(obj, LinearObjective):
        return float(obj.c @ x), obj.c.copy()
    if isinstance(obj, QuadraticObjective):
        return float(x @ obj.q @ x + obj.c @ x), (obj.q + obj.q.T) @ x + obj.c
    if isinstance(obj, TransmitPowerObjective):
        if np.any(x < -DOMAIN_TOL):
            raise ValueError("transmit-power objective needs x >= 0")
        x = np.maximum(x, 0.0)
        n = x.shape[0]
        diag = np.diag(obj.h)
        den = obj.h @ x - diag * x + obj.sigma**2
        tot = den + diag * x
        value = float(np.log(tot / den).sum() / n)
        grad = (obj.h.T @ (1.0 / tot - 1.0 / den) + diag / den) / n
        return value, grad
    raise TypeError(f"unknown objective type {type(obj)!r}")


def descend(instance, cfg):
    """Run projected-gradient ascent, tracing one row per iteration."""
    system = instance.system
    part = compute_partition(system)
    solver_cfg = engine.SolverConfig(
        epsilon=cfg.epsilon, max_iterations=cfg.max_iterations
    )
    # clipping must tolerate points that are feasible only to the solver eps
    clip_tol = default_feasibility_tol(system) + cfg.epsilon * (
        1.0 + float(system.row_norms.max())
    )
    jac_fn = (
        jacobian.surrogate_jacobian
        if cfg.gradient_kind == "surrogate"
        else jacobian.exact_jacobian
    )

    w = gen_initial_point(system.n, 1.0, cfg.seed)
    objective, violation, dual_norm, cad_iters = [], [], [], []
    final_point = None
    truncated = False
    for t in range(1, cfg.iterations + 1):
        res = engine.cad_scaled(w, system, part, solver_cfg)
        if not res.all_converged:
            truncated = True
            break
        y = res.point
        jac_op = jac_fn(w, system, part, projected_point=y)
        for _ in range(cfg.svc_steps):
            _, g = objective_eval(instance, y)
            y = clip(y, cfg.eta * g, system, part, feas_tol=clip_tol).output
        value, g = objective_eval(instance, y)

        objective.append(value)
        violation.append(feasibility(y, system))
        dual_norm.append(float(np.linalg.norm(res.dual)))
        cad_iters.append(res.iterations_max)
        final_point = y

        step = jac_op.apply(g) - cfg.c_h * res.dual
        eta_t = cfg.eta / np.sqrt(t) if cfg.decay else cfg.eta
        w = w + eta_t * step

    return Trace(
        objective=np.array(objective),
        violation=np.array(violation),
        dual_norm=np.array(dual_norm),
        cad_iters=np.array(cad_iters, dtype=np.int64),
        final_point=final_point,
        truncated=truncated,
    )


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for k in range(trace.steps):
            writer.writerow(
                [
                    k + 1,
                    repr(float(trace.objective[k])),
                    repr(float(trace.violation[k])),
                    repr(float(trace.dual_norm[k])),
                    int(trace.cad_iters[k]),
                ]
            )
