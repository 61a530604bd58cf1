"""Sparse linear constraint systems ``Ax <= b`` and their independent components.

A system is stored in triplet form with entries sorted row-major at
construction, which fixes the accumulation order of every scatter sum
downstream and makes solver output independent of the triplet order the
caller happened to use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Component id given to variables that no constraint touches.
UNCONSTRAINED = -1


class ConstraintModelError(ValueError):
    """Raised for structurally impossible systems (bad shapes, bad indices)."""


class SparseConstraintSystem:
    """Linear inequality system ``Ax <= b`` in sparse triplet form.

    Parameters
    ----------
    n : int
        Number of variables.
    m : int
        Number of constraints (rows).
    triplets : sequence of (i, j, value)
        Nonzero entries ``A[i, j] = value``. Entries are canonicalised to
        row-major order; duplicate ``(i, j)`` pairs are kept as-is and
        reported by :func:`validate`, never summed.
    b : sequence of float
        Right-hand sides, length ``m``.

    Derived attributes: ``row_norms`` (2-norm per row), ``l`` (number of
    constraints touching each variable), and per-row support index sets via
    :meth:`row`. Instances are immutable after construction.
    """

    __slots__ = ("n", "m", "rows", "cols", "vals", "b", "row_norms", "l", "_row_ptr")

    def __init__(self, n, m, triplets, b):
        n = int(n)
        m = int(m)
        if n < 1 or m < 1:
            raise ConstraintModelError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
        triplets = list(triplets)
        if not triplets:
            raise ConstraintModelError("system has no nonzero entries")
        rows = np.array([t[0] for t in triplets], dtype=np.int64)
        cols = np.array([t[1] for t in triplets], dtype=np.int64)
        vals = np.array([t[2] for t in triplets], dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (m,):
            raise ConstraintModelError(f"b has shape {b.shape}, expected ({m},)")
        if rows.min() < 0 or rows.max() >= m:
            raise ConstraintModelError("row index out of range")
        if cols.min() < 0 or cols.max() >= n:
            raise ConstraintModelError("column index out of range")

        # Canonical row-major entry order (stable, so duplicates keep their
        # relative input order).
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]

        self.n = n
        self.m = m
        self.rows = rows
        self.cols = cols
        self.vals = vals
        self.b = b
        with np.errstate(invalid="ignore"):
            self.row_norms = np.sqrt(
                np.bincount(rows, weights=vals * vals, minlength=m)
            )
        self.l = np.bincount(cols, minlength=n).astype(np.int64)
        self._row_ptr = np.searchsorted(rows, np.arange(m + 1))
        for a in (self.rows, self.cols, self.vals, self.b, self.row_norms, self.l):
            a.setflags(write=False)

    @property
    def nnz(self):
        return self.vals.size

    @property
    def triplets(self):
        """Entries as a list of (i, j, value) in canonical order."""
        return [
            (int(i), int(j), float(v))
            for i, j, v in zip(self.rows, self.cols, self.vals)
        ]

    def row(self, i):
        """Support and values of constraint ``i``: (col_indices, values, b_i)."""
        lo, hi = self._row_ptr[i], self._row_ptr[i + 1]
        return self.cols[lo:hi], self.vals[lo:hi], float(self.b[i])

    def support(self, i):
        """Sorted variable index set N_i of constraint ``i``."""
        lo, hi = self._row_ptr[i], self._row_ptr[i + 1]
        return np.unique(self.cols[lo:hi])

    def to_dense(self):
        """Dense (m, n) matrix; duplicates sum, so only call on valid systems."""
        a = np.zeros((self.m, self.n))
        np.add.at(a, (self.rows, self.cols), self.vals)
        return a

    def __repr__(self):
        return f"SparseConstraintSystem(n={self.n}, m={self.m}, nnz={self.nnz})"


@dataclass(frozen=True)
class ValidationReport:
    """Findings from :func:`validate`; an empty report means a valid system."""

    empty_rows: tuple = ()
    zero_norm_rows: tuple = ()
    duplicate_entries: tuple = ()
    nonfinite_entries: tuple = ()
    nonfinite_b: tuple = ()

    @property
    def ok(self):
        return not (
            self.empty_rows
            or self.zero_norm_rows
            or self.duplicate_entries
            or self.nonfinite_entries
            or self.nonfinite_b
        )

    def summary(self):
        if self.ok:
            return "valid"
        parts = []
        if self.empty_rows:
            parts.append(f"empty rows: {list(self.empty_rows)}")
        if self.zero_norm_rows:
            parts.append(f"zero-norm rows: {list(self.zero_norm_rows)}")
        if self.duplicate_entries:
            parts.append(f"duplicate (i, j) entries: {list(self.duplicate_entries)}")
        if self.nonfinite_entries:
            parts.append(f"non-finite entries at: {list(self.nonfinite_entries)}")
        if self.nonfinite_b:
            parts.append(f"non-finite b at rows: {list(self.nonfinite_b)}")
        return "; ".join(parts)


def validate(system):
    """Check a system for empty rows, duplicates, zero norms, non-finite data."""
    present = np.zeros(system.m, dtype=bool)
    present[system.rows] = True
    empty = tuple(int(i) for i in np.nonzero(~present)[0])

    finite_vals = np.isfinite(system.vals)
    nonfinite = tuple(
        (int(i), int(j))
        for i, j in zip(system.rows[~finite_vals], system.cols[~finite_vals])
    )
    nonfinite_b = tuple(int(i) for i in np.nonzero(~np.isfinite(system.b))[0])

    # Entries are row-major sorted, so duplicates are adjacent.
    dup = ()
    if system.nnz > 1:
        same = (np.diff(system.rows) == 0) & (np.diff(system.cols) == 0)
        dup = tuple(
            (int(system.rows[k]), int(system.cols[k])) for k in np.nonzero(same)[0]
        )

    with np.errstate(invalid="ignore"):
        zero_norm = tuple(
            int(i)
            for i in np.nonzero(~(system.row_norms > 0) & present)[0]
            if np.all(finite_vals[system.rows == i])
        )

    return ValidationReport(
        empty_rows=empty,
        zero_norm_rows=zero_norm,
        duplicate_entries=dup,
        nonfinite_entries=nonfinite,
        nonfinite_b=nonfinite_b,
    )


@dataclass(frozen=True)
class ConstraintPartition:
    """Finest partition of constraints into variable-disjoint components.

    ``labels[i]`` is the component id of constraint ``i`` (ids are dense,
    0..K-1, ordered by the smallest constraint index in each component).
    ``variable_components[j]`` is the component id of variable ``j`` or
    ``UNCONSTRAINED`` when no constraint touches it.
    """

    labels: np.ndarray
    components: tuple
    variable_components: np.ndarray

    @property
    def n_components(self):
        return len(self.components)


def propagate_labels(system):
    """Min-label propagation over the constraint/variable bipartite graph.

    Constraint labels start at their own indices and alternately take the
    minimum across shared variables until a fixed point; at convergence every
    label equals the smallest constraint index in its connected component.
    Variables in no constraint keep the sentinel ``m``.
    """
    m, n = system.m, system.n
    row_label = np.arange(m, dtype=np.int64)
    var_label = np.full(n, m, dtype=np.int64)
    while True:
        prev = row_label.copy()
        np.minimum.at(var_label, system.cols, row_label[system.rows])
        np.minimum.at(row_label, system.rows, var_label[system.cols])
        if np.array_equal(prev, row_label):
            break
    return row_label, var_label


def partition(system):
    """Compute the finest independent constraint partition of a valid system."""
    row_label, var_label = propagate_labels(system)
    uniq, dense = np.unique(row_label, return_inverse=True)
    components = tuple(
        np.nonzero(dense == k)[0].astype(np.int64) for k in range(uniq.size)
    )
    var_comp = np.full(system.n, UNCONSTRAINED, dtype=np.int64)
    touched = var_label < system.m
    var_comp[touched] = np.searchsorted(uniq, var_label[touched])
    return ConstraintPartition(
        labels=dense.astype(np.int64),
        components=components,
        variable_components=var_comp,
    )


@dataclass(frozen=True)
class BatchedSystem:
    """Block-diagonal concatenation of independent systems.

    ``var_offsets[k]``/``row_offsets[k]`` locate system ``k`` inside the
    combined system; no entry crosses a block boundary by construction.
    """

    systems: tuple
    var_offsets: np.ndarray
    row_offsets: np.ndarray
    combined: SparseConstraintSystem = field(repr=False)

    def block(self, k):
        """(variable slice, constraint slice) of system ``k`` in the batch."""
        return (
            slice(int(self.var_offsets[k]), int(self.var_offsets[k + 1])),
            slice(int(self.row_offsets[k]), int(self.row_offsets[k + 1])),
        )


def concat(systems):
    """Concatenate systems into one block-diagonal :class:`BatchedSystem`."""
    systems = tuple(systems)
    if not systems:
        raise ConstraintModelError("cannot concatenate an empty list of systems")
    var_off = np.concatenate([[0], np.cumsum([s.n for s in systems])]).astype(np.int64)
    row_off = np.concatenate([[0], np.cumsum([s.m for s in systems])]).astype(np.int64)
    triplets = []
    for k, s in enumerate(systems):
        dv, dr = int(var_off[k]), int(row_off[k])
        triplets.extend(
            (int(i) + dr, int(j) + dv, float(v))
            for i, j, v in zip(s.rows, s.cols, s.vals)
        )
    b = np.concatenate([s.b for s in systems])
    combined = SparseConstraintSystem(int(var_off[-1]), int(row_off[-1]), triplets, b)
    return BatchedSystem(
        systems=systems, var_offsets=var_off, row_offsets=row_off, combined=combined
    )
