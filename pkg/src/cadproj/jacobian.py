"""Jacobians of the polytope projection map.

The projection onto a polytope is piecewise affine, so away from facet
boundaries it has a well-defined Jacobian: the linear projection onto the
intersection of the tangent cone at the projected point with the hyperplane
orthogonal to the residual direction. That operator can be low rank. The
surrogate replaces it by the projection onto the hyperplane alone, which is
rank n-1 (or the identity at feasible points) and much cheaper.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import engine
from .model import SparseConstraintSystem, partition as compute_partition

# x counts as feasible for the two-case surrogate formula below this.
FEASIBLE_RTOL = 1e-9
# residual threshold for a constraint to count as active at the projection
ACTIVE_RTOL = 1e-7
# residuals within (1, 10] x threshold make the active set ambiguous
AMBIGUOUS_FACTOR = 10.0


@dataclass
class JacobianOperator:
    """Matrix-free symmetric idempotent operator for a projection Jacobian."""

    kind: str
    base_point: np.ndarray
    projected_point: np.ndarray
    direction: np.ndarray | None
    active_set: tuple | None = None
    ambiguous: bool = False
    _apply: callable = field(default=None, repr=False)

    def apply(self, v):
        v = np.asarray(v, dtype=np.float64)
        if self._apply is None:
            return v.copy()
        return self._apply(v)

    __call__ = apply
    matvec = apply

    @property
    def T(self):
        """The operator is symmetric; transposition is a no-op."""
        return self

    @property
    def n(self):
        return self.base_point.shape[0]

    def as_matrix(self):
        eye = np.eye(self.n)
        return np.column_stack([self.apply(eye[:, j]) for j in range(self.n)])

    @classmethod
    def from_matrix(cls, kind, base_point, projected_point, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(
            kind=kind,
            base_point=np.asarray(base_point, dtype=np.float64),
            projected_point=np.asarray(projected_point, dtype=np.float64),
            direction=None,
            _apply=lambda v: matrix @ v,
        )


def _project(x, system, part, epsilon, max_iterations):
    cfg = engine.SolverConfig(epsilon=epsilon, max_iterations=max_iterations)
    res = engine.cad_scaled(x, system, part, cfg)
    if not res.all_converged:
        raise RuntimeError("projection did not converge while building a Jacobian")
    return res.point


def surrogate_jacobian(
    x, system, partition=None, *, epsilon=1e-12, max_iterations=200_000,
    projected_point=None,
):
    """Hyperplane-projection surrogate: I - d d^T outside C, identity inside."""
    x = np.asarray(x, dtype=np.float64)
    part = partition if partition is not None else compute_partition(system)
    px = (
        np.asarray(projected_point, dtype=np.float64)
        if projected_point is not None
        else _project(x, system, part, epsilon, max_iterations)
    )
    r = x - px
    rnorm = float(np.linalg.norm(r))
    if rnorm <= FEASIBLE_RTOL * (1.0 + float(np.linalg.norm(x))):
        return JacobianOperator("surrogate", x, px, None)
    d = r / rnorm
    return JacobianOperator(
        "surrogate", x, px, d, _apply=lambda v, d=d: v - d * float(d @ v)
    )


def _active_set(system, px):
    residual = system.b - np.array(
        [float(vals @ px[idx]) for idx, vals, _ in (system.row(i) for i in range(system.m))]
    )
    thresh = ACTIVE_RTOL * system.row_norms
    active = np.nonzero(residual <= thresh)[0]
    ambiguous = bool(
        np.any((residual > thresh) & (residual <= AMBIGUOUS_FACTOR * thresh))
    )
    return tuple(int(i) for i in active), ambiguous


def _halfspace_cone_projector(idx, vals):
    sq = float(vals @ vals)

    def proj(w):
        t = float(vals @ w[idx])
        if t <= 0:
            return w.copy()
        y = w.copy()
        y[idx] = y[idx] - (t / sq) * vals
        return y

    return proj


def exact_jacobian(
    x, system, partition=None, *, epsilon=1e-12, max_iterations=200_000,
    projected_point=None,
):
    """Exact Jacobian: projection onto (tangent cone) /\\ (residual hyperplane).

    With a single active constraint the two-set iteration over the halfspace
    cone and the hyperplane computes it; with several active constraints the
    cone is assembled as a zero-rhs constraint system (active rows plus the
    hyperplane as a pair of opposite halfspaces) and projected with the same
    engine. Flags ``ambiguous`` when a residual sits near the activity
    threshold, where the active set is not trustworthy.
    """
    x = np.asarray(x, dtype=np.float64)
    part = partition if partition is not None else compute_partition(system)
    px = (
        np.asarray(projected_point, dtype=np.float64)
        if projected_point is not None
        else _project(x, system, part, epsilon, max_iterations)
    )
    r = x - px
    rnorm = float(np.linalg.norm(r))
    active, ambiguous = _active_set(system, px)
    if rnorm <= FEASIBLE_RTOL * (1.0 + float(np.linalg.norm(x))):
        return JacobianOperator("exact", x, px, None, active, ambiguous)
    d = r / rnorm
    if not active:
        raise RuntimeError("infeasible point with empty active set; projection broken?")

    cfg = engine.SolverConfig(epsilon=epsilon, max_iterations=max_iterations)
    plane = lambda w: w - d * float(d @ w)
    if len(active) == 1:
        idx, vals, _ = system.row(active[0])
        first = _halfspace_cone_projector(idx, vals)
    else:
        # At a differentiable point the residual direction is a strictly
        # positive combination of the active rows, so the tangent cone meets
        # the hyperplane exactly in the nullspace of those rows; project onto
        # that subspace in closed form.
        rows = np.zeros((len(active), system.n))
        for k, i in enumerate(active):
            idx, vals, _ = system.row(i)
            rows[k, idx] = vals
        _, sv, vt = np.linalg.svd(rows, full_matrices=False)
        basis = vt[sv > 1e-12 * sv[0]]

        def first(w, basis=basis):
            return w - basis.T @ (basis @ w)

    def apply(v):
        return engine.dykstra_two_set(v, first, plane, cfg).point

    return JacobianOperator("exact", x, px, d, active, ambiguous, _apply=apply)


def finite_difference_jacobian(
    x, system, step=1e-6, partition=None, *, epsilon=1e-12, max_iterations=200_000,
):
    """Central-difference Jacobian of the projection map, column by column."""
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=np.float64)
    part = partition if partition is not None else compute_partition(system)
    cols = []
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = step
        hi = _project(x + e, system, part, epsilon, max_iterations)
        lo = _project(x - e, system, part, epsilon, max_iterations)
        cols.append((hi - lo) / (2.0 * step))
    return np.column_stack(cols)
