"""Sparse vector clipping: move a feasible point along a direction and stay feasible.

Each constraint admits a maximum scaling factor along the direction; taking
the minimum per independent component (instead of one global minimum) lets
weakly coupled variables move much further while preserving feasibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import scatter
from .model import UNCONSTRAINED


class InfeasiblePointError(ValueError):
    """The clip input must already satisfy the constraints."""


@dataclass
class ClipReport:
    """Per-constraint and per-component scaling factors plus the moved point.

    ``alphas[i]`` may be ``inf`` when the direction never exits constraint i;
    ``argmin`` lists, per component, the constraint indices attaining the
    component factor (several on ties, all rows when the factor is inf).
    """

    alphas: np.ndarray
    component_alphas: np.ndarray
    output: np.ndarray
    mode: str
    argmin: tuple


def default_feasibility_tol(system):
    return 1e-9 * (1.0 + float(np.abs(system.b).max()))


def constraint_alpha(z, v, indices, values, b_i, *, feas_tol=1e-9):
    """Largest alpha >= 0 with z + alpha v still inside ``values . x <= b_i``.

    Reads only the coordinates in the constraint's support. Returns ``inf``
    when the direction points inward or along the face.
    """
    z = np.asarray(z, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    az = float(values @ z[indices])
    if az > b_i + feas_tol:
        raise InfeasiblePointError(f"point violates the constraint by {az - b_i:.3e}")
    av = float(values @ v[indices])
    if av <= 0:
        return np.inf
    return max((b_i - az) / av, 0.0)


def _all_alphas(z, v, system, feas_tol):
    az = scatter(system.rows, system.vals * z[system.cols], system.m)
    worst = float((az - system.b).max())
    if worst > feas_tol:
        raise InfeasiblePointError(f"point violates the system by {worst:.3e}")
    av = scatter(system.rows, system.vals * v[system.cols], system.m)
    alphas = np.full(system.m, np.inf)
    mov = av > 0
    alphas[mov] = np.maximum((system.b[mov] - az[mov]) / av[mov], 0.0)
    return alphas


def clip(z, v, system, partition, mode="sparse", *, feas_tol=None):
    """Clip direction ``v`` at feasible ``z``; sparse mode scales per component.

    Variables outside every component are unconstrained and receive the full
    direction (their factor is inf, capped to 1 by the min with 1).
    """
    if mode not in ("sparse", "standard"):
        raise ValueError("mode must be 'sparse' or 'standard'")
    z = np.asarray(z, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if feas_tol is None:
        feas_tol = default_feasibility_tol(system)
    alphas = _all_alphas(z, v, system, feas_tol)

    n_comp = partition.n_components
    comp_alphas = np.full(n_comp, np.inf)
    np.minimum.at(comp_alphas, partition.labels, alphas)
    argmin = tuple(
        tuple(
            int(i)
            for i in partition.components[k][
                alphas[partition.components[k]] == comp_alphas[k]
            ]
        )
        for k in range(n_comp)
    )

    if mode == "standard":
        alpha_c = float(alphas.min())
        y = z + min(1.0, alpha_c) * v
    else:
        factor = np.ones(system.n)
        constrained = partition.variable_components != UNCONSTRAINED
        factor[constrained] = np.minimum(
            1.0, comp_alphas[partition.variable_components[constrained]]
        )
        y = z + factor * v
    return ClipReport(
        alphas=alphas,
        component_alphas=comp_alphas,
        output=y,
        mode=mode,
        argmin=argmin,
    )


def clip_chain(z, directions, system, partition, *, mode="sparse", feas_tol=None):
    """Apply several clipping layers in sequence; every intermediate is feasible."""
    point = np.asarray(z, dtype=np.float64)
    for v in directions:
        point = clip(point, v, system, partition, mode=mode, feas_tol=feas_tol).output
    return point
