# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: scatter sums and the Dykstra sweep loops.

Arithmetic order matches the numpy fallback exactly (ascending entry
position everywhere), so both backends return bit-identical iterates.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def scatter_sum(const cnp.int64_t[::1] indices, const cnp.float64_t[::1] values,
                Py_ssize_t size):
    out = np.zeros(size)
    cdef cnp.float64_t[::1] o = out
    cdef Py_ssize_t k
    for k in range(indices.shape[0]):
        o[indices[k]] += values[k]
    return out


cdef double _max_violation(const cnp.int64_t[::1] row, const cnp.int64_t[::1] col,
                           const cnp.float64_t[::1] vals, const cnp.float64_t[::1] b,
                           const cnp.float64_t[::1] x, cnp.float64_t[::1] rowsum):
    cdef Py_ssize_t e, i
    cdef Py_ssize_t mb = b.shape[0]
    cdef double v, best
    for i in range(mb):
        rowsum[i] = 0.0
    for e in range(row.shape[0]):
        rowsum[row[e]] += vals[e] * x[col[e]]
    best = rowsum[0] - b[0]
    for i in range(1, mb):
        v = rowsum[i] - b[i]
        if v > best:
            best = v
    return best


cdef double _distance(const cnp.float64_t[::1] x, const cnp.float64_t[::1] x0):
    cdef Py_ssize_t j
    cdef double acc = 0.0, d
    for j in range(x.shape[0]):
        d = x[j] - x0[j]
        acc += d * d
    return acc ** 0.5


def cad_block(const cnp.int64_t[::1] row, const cnp.int64_t[::1] col,
              const cnp.float64_t[::1] vals, const cnp.float64_t[::1] b,
              const cnp.float64_t[::1] x0, const cnp.float64_t[::1] l,
              double eps, long max_iter, bint record):
    cdef Py_ssize_t nnz = vals.shape[0]
    cdef Py_ssize_t mb = b.shape[0]
    cdef Py_ssize_t nb = x0.shape[0]
    x_arr = np.array(x0, dtype=np.float64)
    cdef cnp.float64_t[::1] x = x_arr
    cdef cnp.float64_t[::1] p = np.zeros(nnz)
    cdef cnp.float64_t[::1] z = np.empty(nnz)
    cdef cnp.float64_t[::1] rowsum = np.empty(mb)
    cdef cnp.float64_t[::1] s = np.empty(mb)
    cdef cnp.float64_t[::1] xacc = np.empty(nb)
    hist_arr = np.empty(max_iter if record else 0)
    cdef cnp.float64_t[::1] hist = hist_arr
    cdef long it = 0
    cdef bint converged = 0
    cdef double viol, t
    cdef Py_ssize_t e, i, j

    while True:
        viol = _max_violation(row, col, vals, b, x, rowsum)
        if viol <= eps:
            converged = 1
            break
        if it >= max_iter:
            converged = 0
            break
        for e in range(nnz):
            z[e] = x[col[e]] + p[e]
        for i in range(mb):
            rowsum[i] = 0.0
        for e in range(nnz):
            rowsum[row[e]] += vals[e] * z[e]
        for i in range(mb):
            t = b[i] - rowsum[i]
            s[i] = t if t < 0.0 else 0.0
        for e in range(nnz):
            p[e] = -vals[e] * s[row[e]]
        for j in range(nb):
            xacc[j] = 0.0
        for e in range(nnz):
            xacc[col[e]] += z[e] - p[e]
        for j in range(nb):
            x[j] = xacc[j] / l[j]
        it += 1
        if record:
            hist[it - 1] = _distance(x, x0)

    history = hist_arr[:it].copy() if record else None
    return x_arr, int(it), bool(converged), viol, history


def simultaneous_block(const cnp.int64_t[::1] row, const cnp.int64_t[::1] col,
                       const cnp.float64_t[::1] vals, const cnp.float64_t[::1] b,
                       const cnp.float64_t[::1] x0, double m_total,
                       double eps, long max_iter, bint record):
    cdef Py_ssize_t nnz = vals.shape[0]
    cdef Py_ssize_t mb = b.shape[0]
    cdef Py_ssize_t nb = x0.shape[0]
    x_arr = np.array(x0, dtype=np.float64)
    cdef cnp.float64_t[::1] x = x_arr
    cdef cnp.float64_t[::1] p = np.zeros(nnz)
    cdef cnp.float64_t[::1] z = np.empty(nnz)
    cdef cnp.float64_t[::1] rowsum = np.empty(mb)
    cdef cnp.float64_t[::1] s = np.empty(mb)
    cdef cnp.float64_t[::1] xacc = np.empty(nb)
    hist_arr = np.empty(max_iter if record else 0)
    cdef cnp.float64_t[::1] hist = hist_arr
    cdef long it = 0
    cdef bint converged = 0
    cdef double viol, t
    cdef Py_ssize_t e, i, j

    while True:
        viol = _max_violation(row, col, vals, b, x, rowsum)
        if viol <= eps:
            converged = 1
            break
        if it >= max_iter:
            converged = 0
            break
        for e in range(nnz):
            z[e] = x[col[e]] + p[e]
        for i in range(mb):
            rowsum[i] = 0.0
        for e in range(nnz):
            rowsum[row[e]] += vals[e] * z[e]
        for i in range(mb):
            t = b[i] - rowsum[i]
            s[i] = t if t < 0.0 else 0.0
        for e in range(nnz):
            p[e] = -vals[e] * s[row[e]]
        for j in range(nb):
            xacc[j] = 0.0
        for e in range(nnz):
            xacc[col[e]] += (z[e] - p[e]) - x[col[e]]
        for j in range(nb):
            x[j] = x[j] + xacc[j] / m_total
        it += 1
        if record:
            hist[it - 1] = _distance(x, x0)

    history = hist_arr[:it].copy() if record else None
    return x_arr, int(it), bool(converged), viol, history
