# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled solver kernels; semantics mirror `_kernels_py`.

The per-round game solves dominate experiment runtime, so the simplex and
mirror-descent inner loops live here. Floating-point results may differ from
the numpy fallback in the last bits (different summation order); both
backends satisfy the same feasibility contracts and are individually
deterministic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double RATIO_EPS = 1e-12
cdef double COST_TOL = 1e-11
cdef int STALL_LIMIT = 50
cdef double INFINITY_D = float("inf")


def epigraph_simplex(object d_in, double stop_at, long max_iter):
    """Minimize s s.t. D x <= s 1, sum x = 1, x >= 0, s >= 0; early exit at
    s <= stop_at. Returns (x, max_violation, pivots, status)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] D = \
        np.ascontiguousarray(d_in, dtype=np.float64)
    cdef Py_ssize_t m = D.shape[0]
    cdef Py_ssize_t n = D.shape[1]
    cdef Py_ssize_t i, j, r, c, e, j0, i0, srow
    cdef double best, v, sval, ratio, best_ratio, factor, piv

    # starting vertex: pure column with the smallest worst-case row
    j0 = 0
    best = INFINITY_D
    for j in range(n):
        v = D[0, j]
        for i in range(1, m):
            if D[i, j] > v:
                v = D[i, j]
        if v < best:
            best = v
            j0 = j
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.zeros(n)
    if best <= stop_at:
        x[j0] = 1.0
        return x, best, 0, 0
    i0 = 0
    for i in range(1, m):
        if D[i, j0] > D[i0, j0]:
            i0 = i

    cdef Py_ssize_t ncol = n + 1 + m
    cdef Py_ssize_t rows = m + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] T = np.zeros((rows, ncol + 1))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] basis = np.empty(rows, dtype=np.int64)
    for i in range(m):
        for j in range(n):
            T[i, j] = D[i, j]
        T[i, n] = -1.0
        T[i, n + 1 + i] = 1.0
        basis[i] = n + 1 + i
    for j in range(n):
        T[m, j] = 1.0
    T[m, ncol] = 1.0
    basis[m] = j0
    basis[i0] = n

    _pivot(T, rows, ncol, m, j0)
    _pivot(T, rows, ncol, i0, n)

    cdef long it = 0
    cdef int bland = 0
    cdef int stall = 0
    cdef double last_obj = INFINITY_D
    cdef int status = 1
    while it < max_iter:
        it += 1
        srow = -1
        for r in range(rows):
            if basis[r] == n:
                srow = r
                break
        sval = T[srow, ncol] if srow >= 0 else 0.0
        if sval <= stop_at + 1e-15:
            status = 0
            break
        # reduced costs: c = e_s, so red[j] = (j == n) - T[srow, j]
        e = -1
        if bland:
            for j in range(ncol):
                v = (1.0 if j == n else 0.0) - (T[srow, j] if srow >= 0 else 0.0)
                if v < -COST_TOL:
                    e = j
                    break
            if e < 0:
                status = 0
                break
        else:
            best = 0.0
            for j in range(ncol):
                v = (1.0 if j == n else 0.0) - (T[srow, j] if srow >= 0 else 0.0)
                if v < best:
                    best = v
                    e = j
            if e < 0 or best >= -COST_TOL:
                status = 0
                break
        best_ratio = INFINITY_D
        r = -1
        for i in range(rows):
            piv = T[i, e]
            if piv > RATIO_EPS:
                ratio = T[i, ncol] / piv
                if ratio < best_ratio:
                    best_ratio = ratio
                    r = i
        if r < 0:
            status = 0
            break
        _pivot(T, rows, ncol, r, e)
        basis[r] = e
        if sval >= last_obj - 1e-13:
            stall += 1
            if stall > STALL_LIMIT:
                bland = 1
        else:
            stall = 0
        last_obj = sval

    cdef double total = 0.0
    for r in range(rows):
        if basis[r] < n:
            v = T[r, ncol]
            x[basis[r]] = v if v > 0.0 else 0.0
    for j in range(n):
        total += x[j]
    if total > 0.0:
        for j in range(n):
            x[j] /= total
    cdef double viol = -INFINITY_D
    for i in range(m):
        v = 0.0
        for j in range(n):
            v += D[i, j] * x[j]
        if v > viol:
            viol = v
    return x, viol, it, status


cdef void _pivot(cnp.ndarray[cnp.float64_t, ndim=2] T, Py_ssize_t rows,
                 Py_ssize_t ncol, Py_ssize_t r, Py_ssize_t c):
    cdef Py_ssize_t i, j
    cdef double piv = T[r, c]
    cdef double factor
    for j in range(ncol + 1):
        T[r, j] /= piv
    for i in range(rows):
        if i == r:
            continue
        factor = T[i, c]
        if factor != 0.0:
            for j in range(ncol + 1):
                T[i, j] -= factor * T[r, j]


cdef void _kl_project_floored(double* w, double* out, Py_ssize_t* order,
                              double* sorted_w, Py_ssize_t k, double floor):
    """KL-projection onto {p >= floor, sum p = 1}; stable insertion sort."""
    cdef Py_ssize_t i, j, f
    cdef double key, prefix, lam
    cdef Py_ssize_t keyi
    if k * floor >= 1.0:
        for i in range(k):
            out[i] = 1.0 / k
        return
    for i in range(k):
        order[i] = i
        sorted_w[i] = w[i]
    for i in range(1, k):
        key = sorted_w[i]
        keyi = order[i]
        j = i - 1
        while j >= 0 and sorted_w[j] > key:
            sorted_w[j + 1] = sorted_w[j]
            order[j + 1] = order[j]
            j -= 1
        sorted_w[j + 1] = key
        order[j + 1] = keyi
    prefix = 0.0
    for f in range(k):
        # prefix holds sum of the f smallest weights
        if 1.0 - prefix <= 0.0:
            break
        lam = (1.0 - f * floor) / (1.0 - prefix)
        if (f == 0 or lam * sorted_w[f - 1] <= floor + 1e-15) and \
                lam * sorted_w[f] >= floor - 1e-15:
            for i in range(f):
                out[order[i]] = floor
            for i in range(f, k):
                out[order[i]] = sorted_w[i] * lam
            return
        prefix += sorted_w[f]
    for i in range(k):
        out[i] = 1.0 / k


def minmax_descent(object y_in, double gamma, double floor, double rhs,
                   double stop_viol, double eta0, long max_iter, object warm):
    """Entropic mirror descent with Polyak-style steps; see _kernels_py."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Y = \
        np.ascontiguousarray(y_in, dtype=np.float64)
    cdef Py_ssize_t K = Y.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p_arr = np.empty(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_arr = np.empty(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(4 * K)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order_arr = np.empty(K, dtype=np.int64)
    cdef double* p = <double*> p_arr.data
    cdef double* best_p = <double*> best_arr.data
    cdef double* g = <double*> scratch.data
    cdef double* grad = (<double*> scratch.data) + K
    cdef double* w = (<double*> scratch.data) + 2 * K
    cdef double* sorted_w = (<double*> scratch.data) + 3 * K
    cdef Py_ssize_t* order = <Py_ssize_t*> order_arr.data
    cdef Py_ssize_t i, j, imax
    cdef double inv_budget = 2.0 / gamma
    cdef double viol, best_v, sup, gap, eta, zmin, total, v
    cdef double eta_floor = eta0 / 4096.0
    cdef long it = 0
    cdef int status = 1

    if warm is not None:
        warm_arr = np.ascontiguousarray(warm, dtype=np.float64)
        for i in range(K):
            w[i] = (<double*> (<cnp.ndarray> warm_arr).data)[i]
        _kl_project_floored(w, p, order, sorted_w, K, floor)
    else:
        for i in range(K):
            p[i] = 1.0 / K
    best_v = INFINITY_D
    while it <= max_iter:
        imax = 0
        for i in range(K):
            v = inv_budget / p[i]
            for j in range(K):
                v += Y[i, j] * p[j]
            g[i] = v
            if v > g[imax]:
                imax = i
        viol = g[imax] - rhs
        if viol < best_v:
            best_v = viol
            for i in range(K):
                best_p[i] = p[i]
        if best_v <= stop_viol:
            status = 0
            break
        if it == max_iter:
            break
        it += 1
        sup = 0.0
        for j in range(K):
            grad[j] = Y[imax, j]
            if j == imax:
                grad[j] -= inv_budget / (p[imax] * p[imax])
            if fabs(grad[j]) > sup:
                sup = fabs(grad[j])
        gap = viol if viol > stop_viol * 0.5 else stop_viol * 0.5
        eta = gap / (sup * sup if sup * sup > 1e-300 else 1e-300)
        if eta < eta_floor:
            eta = eta_floor
        if eta > 1.0:
            eta = 1.0
        zmin = grad[0]
        for j in range(1, K):
            if grad[j] < zmin:
                zmin = grad[j]
        total = 0.0
        for j in range(K):
            w[j] = p[j] * exp(-eta * (grad[j] - zmin))
            total += w[j]
        for j in range(K):
            w[j] /= total
        _kl_project_floored(w, p, order, sorted_w, K, floor)
    out = np.empty(K)
    for i in range(K):
        out[i] = best_p[i]
    return out, best_v, it, status
