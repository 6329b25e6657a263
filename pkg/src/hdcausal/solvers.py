"""Outcome regression and the penalized weighted least-squares solver.

The outcome model supplies the coefficients that become adaptive penalty
weights. The propensity side repeatedly solves a weighted lasso
subproblem inside iteratively reweighted least squares; the subproblem
solver is cyclic coordinate descent with soft-thresholding and an
unpenalized intercept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ._kernels import cd_sweeps
from .data import Dataset
from .errors import ConvergenceError, DataError

PROB_CLIP = 1e-6
CD_TOL = 1e-8
CD_MAX_SWEEPS = 10_000
KKT_TOL = 1e-6


@dataclass(frozen=True)
class OutcomeFit:
    """Outcome regression of Y on (1, A, X)."""

    beta_A: float
    beta: np.ndarray
    intercept: float
    family: str  # gaussian | binomial


@dataclass(frozen=True)
class WorkingResponse:
    """IRLS working response z and weights t for a logistic model."""

    z: np.ndarray
    t: np.ndarray


@dataclass(frozen=True)
class LassoFit:
    alpha: np.ndarray
    intercept: float
    n_iter: int
    converged: bool
    kkt_residual: float
    objective_trace: np.ndarray | None = None


def soft_threshold(z: float, g: float) -> float:
    """sign(z) * max(|z| - g, 0) for a non-negative gate g."""
    if g < 0:
        raise ValueError("threshold must be non-negative")
    if z > g:
        return z - g
    if z < -g:
        return z + g
    return 0.0


def fit_outcome(d: Dataset) -> OutcomeFit:
    """Fit the outcome family implied by ``d.outcome_kind``.

    Gaussian outcomes use least squares of Y on (1, A, X); binary outcomes
    use a logistic maximum likelihood fit by Newton iteration. Rank
    deficiency and non-convergence (separation) raise instead of returning
    a silently bad fit.
    """
    n, q = d.X.shape
    if q + 2 > n:
        raise DataError(f"outcome model needs n >= q + 2 (n={n}, q={q})")
    M = np.column_stack([np.ones(n), d.A.astype(np.float64), d.X])
    if d.outcome_kind == "continuous":
        coef, _, rank, _ = np.linalg.lstsq(M, d.Y, rcond=None)
        if rank < M.shape[1]:
            raise DataError("outcome design matrix is rank deficient")
    else:
        coef = _newton_logistic(M, d.Y)
    return OutcomeFit(
        beta_A=float(coef[1]),
        beta=coef[2:].copy(),
        intercept=float(coef[0]),
        family="gaussian" if d.outcome_kind == "continuous" else "binomial",
    )


def _newton_logistic(M: np.ndarray, y: np.ndarray, tol=1e-10, max_iter=100):
    beta = np.zeros(M.shape[1])
    for _ in range(max_iter):
        p = expit(M @ beta)
        weight = np.maximum(p * (1.0 - p), 1e-10)
        grad = M.T @ (y - p)
        hess = (M * weight[:, None]).T @ M
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise ConvergenceError(
                "singular Hessian in logistic outcome fit (possible separation)"
            ) from None
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            return beta
    raise ConvergenceError(
        "logistic outcome fit did not converge (possible separation)"
    )


def working_response(
    X: np.ndarray,
    A: np.ndarray,
    alpha: np.ndarray,
    intercept: float = 0.0,
    clip: float = PROB_CLIP,
) -> WorkingResponse:
    """Working response for one IRLS step of a logistic propensity model.

    Probabilities are clipped to [clip, 1 - clip] before forming
    t = p(1-p) and z = lp + (a - p)/t, so both stay finite near
    separation.
    """
    lp = intercept + X @ alpha
    p = np.clip(expit(lp), clip, 1.0 - clip)
    t = p * (1.0 - p)
    z = lp + (A - p) / t
    return WorkingResponse(z=z, t=t)


def _kkt_residual(X, z, t, w, lam1, alpha, intercept, icol, fit_intercept):
    # Independent stationarity check (plain numpy, no shared state with
    # the descent kernel).
    r = z - intercept * icol - X @ alpha
    grad = -(X.T @ (t * r))
    worst = 0.0
    if fit_intercept:
        worst = abs(float(np.sum(t * icol * r)))
    finite = np.isfinite(w)
    active = finite & (alpha != 0.0)
    if active.any():
        v = np.abs(grad[active] + lam1 * w[active] * np.sign(alpha[active]))
        worst = max(worst, float(v.max()))
    inactive = finite & (alpha == 0.0)
    if inactive.any():
        v = np.abs(grad[inactive]) - lam1 * w[inactive]
        worst = max(worst, float(max(v.max(), 0.0)))
    return worst


def weighted_lasso_cd(
    X: np.ndarray,
    z: np.ndarray,
    t: np.ndarray,
    w: np.ndarray,
    lambda1: float,
    *,
    fit_intercept: bool = True,
    intercept_col: np.ndarray | None = None,
    start_alpha: np.ndarray | None = None,
    start_intercept: float = 0.0,
    tol: float = CD_TOL,
    max_sweeps: int = CD_MAX_SWEEPS,
    record_objective: bool = False,
) -> LassoFit:
    """Solve  0.5 * sum t_i (z_i - c - x_i.alpha)^2 + lambda1 * sum w_j |alpha_j|.

    The intercept c is never penalized. A penalty multiplier w_j of +inf
    pins alpha_j at zero regardless of lambda1. ``intercept_col`` lets
    callers exclude rows from the intercept (used for ridge-augmentation
    rows, which carry no intercept); by default every row has one.

    Convergence means the largest coefficient change in a sweep fell
    below ``tol`` and an independently evaluated KKT residual is at most
    1e-6; if the sweep criterion is met but the KKT check is not, descent
    continues with a tightened tolerance until the sweep budget runs out.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n, q = X.shape
    if lambda1 < 0:
        raise ValueError("lambda1 must be non-negative")
    if np.isnan(t).any() or (t <= 0).any():
        raise ValueError("row weights must be positive")
    if np.isnan(w).any() or (w < 0).any():
        raise ValueError("penalty multipliers must be non-negative")
    icol = np.ones(n) if intercept_col is None else np.ascontiguousarray(
        intercept_col, dtype=np.float64
    )
    alpha = np.zeros(q) if start_alpha is None else np.array(start_alpha, dtype=np.float64)
    intercept = float(start_intercept) if fit_intercept else 0.0

    traces = []
    sweeps_left = max_sweeps
    total_sweeps = 0
    tol_now = tol
    change_ok = False
    kkt = np.inf
    while True:
        buf = np.empty(sweeps_left if record_objective else 0)
        intercept, used, last_change = cd_sweeps(
            X, z, t, w, lambda1, alpha, intercept, icol, fit_intercept,
            tol_now, sweeps_left, buf,
        )
        if record_objective:
            traces.append(buf[:used].copy())
        total_sweeps += used
        sweeps_left -= used
        change_ok = last_change < tol_now
        kkt = _kkt_residual(X, z, t, w, lambda1, alpha, intercept, icol, fit_intercept)
        if (change_ok and kkt <= KKT_TOL) or sweeps_left <= 0:
            break
        tol_now = tol_now / 100.0
    return LassoFit(
        alpha=alpha,
        intercept=intercept,
        n_iter=total_sweeps,
        converged=bool(change_ok and kkt <= KKT_TOL),
        kkt_residual=float(kkt),
        objective_trace=np.concatenate(traces) if record_objective else None,
    )
