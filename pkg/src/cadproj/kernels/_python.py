"""Pure-numpy kernels, bit-compatible with the compiled versions.

Every reduction here accumulates in ascending entry position (np.bincount,
np.where) so the native and fallback backends produce identical floats.
"""

import numpy as np


def scatter_sum(indices, values, size):
    """Segmented sum: out[i] = sum of values[k] over k with indices[k] == i."""
    return np.bincount(indices, weights=values, minlength=size)


def _viol(row, col, vals, b, x, mb):
    r = np.bincount(row, weights=vals * x[col], minlength=mb) - b
    return float(r.max())


def cad_block(row, col, vals, b, x0, l, eps, max_iter, record):
    """Component-averaged Dykstra sweeps on one independent block.

    ``vals``/``b`` must be row-normalised (and variable-scaled by the caller
    for the orthogonal variant). Returns (x, sweeps, converged, violation,
    distance_history).
    """
    mb = b.shape[0]
    nb = x0.shape[0]
    x = x0.astype(np.float64, copy=True)
    p = np.zeros(vals.shape[0])
    hist = [] if record else None
    it = 0
    while True:
        viol = _viol(row, col, vals, b, x, mb)
        if viol <= eps:
            converged = True
            break
        if it >= max_iter:
            converged = False
            break
        z = x[col] + p
        rs = np.bincount(row, weights=vals * z, minlength=mb)
        t = b - rs
        s = np.where(t < 0.0, t, 0.0)
        p = -vals * s[row]
        x = np.bincount(col, weights=z - p, minlength=nb) / l
        it += 1
        if record:
            d = x - x0
            hist.append(float(np.sqrt(np.dot(d, d))))
    history = np.array(hist) if record else None
    return x, it, converged, viol, history


def simultaneous_block(row, col, vals, b, x0, m_total, eps, max_iter, record):
    """Simultaneous (product-space) Dykstra sweeps on one block.

    The averaging always uses the constraint count of the *full* system,
    so running blocks separately reproduces the joint iteration exactly.
    """
    mb = b.shape[0]
    nb = x0.shape[0]
    x = x0.astype(np.float64, copy=True)
    p = np.zeros(vals.shape[0])
    hist = [] if record else None
    it = 0
    while True:
        viol = _viol(row, col, vals, b, x, mb)
        if viol <= eps:
            converged = True
            break
        if it >= max_iter:
            converged = False
            break
        z = x[col] + p
        rs = np.bincount(row, weights=vals * z, minlength=mb)
        t = b - rs
        s = np.where(t < 0.0, t, 0.0)
        p = -vals * s[row]
        # contribution of constraint i to x_j is P_{C_i}(x + p_i)_j - x_j
        x = x + np.bincount(col, weights=z - p - x[col], minlength=nb) / m_total
        it += 1
        if record:
            d = x - x0
            hist.append(float(np.sqrt(np.dot(d, d))))
    history = np.array(hist) if record else None
    return x, it, converged, viol, history
