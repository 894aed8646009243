"""Pure-numpy solver kernels (fallback backend).

Semantics match `_speedups.pyx`; the compiled module is preferred at import
time when available. Both implement:

  * epigraph_simplex -- minimize max_i (D x)_i over the simplex, i.e. the
    linear feasibility core behind CCE and zero-sum Nash solves,
  * minmax_descent   -- entropic mirror descent for the inverse-gap
    feasibility program on the floored simplex.

Status codes: 0 = converged, 1 = iteration budget exhausted.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_RATIO_EPS = 1e-12
_COST_TOL = 1e-11
_STALL_LIMIT = 50


def epigraph_simplex(D: np.ndarray, stop_at: float, max_iter: int):
    """Minimize s subject to D x <= s 1, sum x = 1, x >= 0, s >= 0.

    Dantzig pivoting with first-index tie breaks, switching to Bland's rule
    after a degenerate stall; stops early once the basic solution reaches
    s <= stop_at. Returns (x, max_violation, pivots, status).
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    m, n = D.shape
    col_max = D.max(axis=0)
    j0 = int(np.argmin(col_max))
    if col_max[j0] <= stop_at:
        x = np.zeros(n)
        x[j0] = 1.0
        return x, float(col_max[j0]), 0, 0
    i0 = int(np.argmax(D[:, j0]))

    ncol = n + 1 + m  # x vars, epigraph s, row slacks
    rows = m + 1
    T = np.zeros((rows, ncol + 1))
    T[:m, :n] = D
    T[:m, n] = -1.0
    T[:m, n + 1:ncol] = np.eye(m)
    T[m, :n] = 1.0
    T[m, ncol] = 1.0
    basis = np.arange(n + 1, n + 1 + m, dtype=np.int64)
    basis = np.append(basis, 0)
    basis[m] = j0
    basis[i0] = n

    def pivot(r, c):
        T[r] /= T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        T[...] -= np.outer(col, T[r])

    pivot(m, j0)
    pivot(i0, n)

    c_obj = np.zeros(ncol)
    c_obj[n] = 1.0
    it = 0
    bland = False
    stall = 0
    last_obj = np.inf
    status = 1
    while it < max_iter:
        it += 1
        srow = np.nonzero(basis == n)[0]
        sval = float(T[srow[0], ncol]) if srow.size else 0.0
        if sval <= stop_at + 1e-15:
            status = 0
            break
        red = c_obj - c_obj[basis] @ T[:, :ncol]
        if bland:
            cand = np.nonzero(red < -_COST_TOL)[0]
            if cand.size == 0:
                status = 0
                break
            e = int(cand[0])
        else:
            e = int(np.argmin(red))
            if red[e] >= -_COST_TOL:
                status = 0
                break
        col = T[:, e]
        pos = col > _RATIO_EPS
        if not pos.any():
            status = 0  # unbounded cannot happen here; treat as optimal
            break
        ratios = np.where(pos, T[:, ncol] / np.where(pos, col, 1.0), np.inf)
        r = int(np.argmin(ratios))
        pivot(r, e)
        basis[r] = e
        if sval >= last_obj - 1e-13:
            stall += 1
            if stall > _STALL_LIMIT:
                bland = True
        else:
            stall = 0
        last_obj = sval

    x = np.zeros(n)
    for r in range(rows):
        if basis[r] < n:
            x[basis[r]] = max(T[r, ncol], 0.0)
    total = x.sum()
    if total > 0:
        x /= total
    return x, float((D @ x).max()), it, status


def kl_project_floored(w: np.ndarray, floor: float) -> np.ndarray:
    """KL-projection of a simplex point onto {p : p_i >= floor, sum p = 1}."""
    k = w.shape[0]
    if k * floor >= 1.0:
        return np.full(k, 1.0 / k)
    order = np.argsort(w, kind="stable")
    ws = w[order]
    prefix = np.concatenate(([0.0], np.cumsum(ws)))
    res = np.empty(k)
    for f in range(k):
        denom = 1.0 - prefix[f]
        if denom <= 0.0:
            break
        lam = (1.0 - f * floor) / denom
        ok_low = f == 0 or lam * ws[f - 1] <= floor + 1e-15
        ok_high = lam * ws[f] >= floor - 1e-15
        if ok_low and ok_high:
            res[order[:f]] = floor
            res[order[f:]] = ws[f:] * lam
            return res
    return np.full(k, 1.0 / k)


def minmax_descent(Y: np.ndarray, gamma: float, floor: float, rhs: float,
                   stop_viol: float, eta0: float, max_iter: int,
                   warm: np.ndarray | None):
    """Entropic mirror descent on max_i [ (Y p)_i + (2/gamma)/p_i - rhs ].

    Polyak-style step (gap over squared sup-norm of the active subgradient),
    uniform (or warm) start, iterates kept on the floored simplex. Returns
    (best p, best signed violation, iterations, status).
    """
    K = Y.shape[0]
    if warm is not None:
        p = kl_project_floored(np.asarray(warm, dtype=np.float64), floor)
    else:
        p = np.full(K, 1.0 / K)
    inv_budget = 2.0 / gamma
    best_v = np.inf
    best_p = p
    eta_floor = eta0 / 4096.0
    status = 1
    it = 0
    while it <= max_iter:
        g = Y @ p + inv_budget / p
        i = int(np.argmax(g))
        viol = float(g[i] - rhs)
        if viol < best_v:
            best_v = viol
            best_p = p.copy()
        if best_v <= stop_viol:
            status = 0
            break
        if it == max_iter:
            break
        it += 1
        grad = Y[i].copy()
        grad[i] -= inv_budget / (p[i] * p[i])
        sup = float(np.abs(grad).max())
        gap = max(viol, stop_viol * 0.5)
        eta = gap / max(sup * sup, 1e-300)
        eta = min(max(eta, eta_floor), 1.0)
        z = grad - grad.min()
        w = p * np.exp(-eta * z)
        w /= w.sum()
        p = kl_project_floored(w, floor)
    return best_p, best_v, it, status
