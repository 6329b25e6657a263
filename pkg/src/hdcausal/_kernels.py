"""Numba kernels for the two hot loops.

Everything here is deterministic: the screening kernel writes each feature
score to its own slot (thread order never matters) and the coordinate
descent kernel is strictly sequential.
"""

from __future__ import annotations

import numba as nb
import numpy as np
from numba import prange

# The workqueue layer is fork-safe, so screening can run inside forked
# worker processes; must be set before the first parallel compilation.
nb.config.THREADING_LAYER = "workqueue"


@nb.njit(cache=True)
def ball_group_term(x, y):
    """Single-group dependence term of the conditional ball covariance.

    For every anchor pair (i, j) the fraction of points falling in the
    closed ball around x_i with edge x_j is compared with the joint x/y
    ball membership; squared gaps are averaged over the m*m anchor pairs.
    O(m^3) time, O(m) extra space.
    """
    m = x.shape[0]
    dx = np.empty(m)
    dy = np.empty(m)
    acc = 0.0
    for i in range(m):
        for k in range(m):
            dx[k] = abs(x[k] - x[i])
            dy[k] = abs(y[k] - y[i])
        for j in range(m):
            rx = dx[j]
            ry = dy[j]
            cx = 0
            cy = 0
            cxy = 0
            for k in range(m):
                in_x = dx[k] <= rx
                in_y = dy[k] <= ry
                if in_x:
                    cx += 1
                    if in_y:
                        cxy += 1
                if in_y:
                    cy += 1
            gap = cxy / m - (cx / m) * (cy / m)
            acc += gap * gap
    return acc / (m * m)


@nb.njit(cache=True, parallel=True)
def ball_scores(X1, y1, X0, y0, w_hat):
    """Per-feature conditional ball covariance, parallel over columns."""
    p = X1.shape[1]
    out = np.empty(p)
    for j in prange(p):
        out[j] = w_hat * ball_group_term(X1[:, j], y1) + (1.0 - w_hat) * ball_group_term(
            X0[:, j], y0
        )
    return out


@nb.njit(cache=True)
def cd_sweeps(X, z, t, w, lam1, alpha, intercept, icol, fit_intercept,
              tol, max_sweeps, obj_trace):
    """Cyclic coordinate descent for the weighted lasso subproblem.

    Minimizes 0.5 * sum_i t_i (z_i - c*icol_i - x_i.alpha)^2
              + lam1 * sum_j w_j |alpha_j|
    in place, starting from (alpha, intercept). Coordinates with infinite
    penalty weight are pinned at zero. Returns (intercept, sweeps_used,
    last_max_change). ``obj_trace`` (len >= max_sweeps) records the
    objective after every sweep when non-empty.
    """
    n, q = X.shape
    col_scale = np.zeros(q)
    for j in range(q):
        s = 0.0
        for i in range(n):
            s += t[i] * X[i, j] * X[i, j]
        col_scale[j] = s
    ic_scale = 0.0
    for i in range(n):
        ic_scale += t[i] * icol[i] * icol[i]

    # residual r = z - c*icol - X.alpha
    r = np.empty(n)
    for i in range(n):
        fit = intercept * icol[i]
        for j in range(q):
            if alpha[j] != 0.0:
                fit += X[i, j] * alpha[j]
        r[i] = z[i] - fit

    record = obj_trace.shape[0] > 0
    sweeps = 0
    max_change = np.inf
    while sweeps < max_sweeps:
        max_change = 0.0
        if fit_intercept and ic_scale > 0.0:
            num = 0.0
            for i in range(n):
                num += t[i] * icol[i] * r[i]
            delta = num / ic_scale
            if delta != 0.0:
                intercept += delta
                for i in range(n):
                    r[i] -= delta * icol[i]
            change = abs(delta)
            if change > max_change:
                max_change = change
        for j in range(q):
            if not np.isfinite(w[j]) or col_scale[j] == 0.0:
                continue
            rho = alpha[j] * col_scale[j]
            for i in range(n):
                rho += t[i] * X[i, j] * r[i]
            gate = lam1 * w[j]
            if rho > gate:
                new = (rho - gate) / col_scale[j]
            elif rho < -gate:
                new = (rho + gate) / col_scale[j]
            else:
                new = 0.0
            delta = new - alpha[j]
            if delta != 0.0:
                alpha[j] = new
                for i in range(n):
                    r[i] -= delta * X[i, j]
            change = abs(delta)
            if change > max_change:
                max_change = change
        if record:
            obj = 0.0
            for i in range(n):
                obj += 0.5 * t[i] * r[i] * r[i]
            for j in range(q):
                if alpha[j] != 0.0:
                    obj += lam1 * w[j] * abs(alpha[j])
            obj_trace[sweeps] = obj
        sweeps += 1
        if max_change < tol:
            break
    return intercept, sweeps, max_change
