"""Adaptive-lasso and adaptive-elastic-net propensity fits with wAMD tuning.

Both methods penalize a logistic propensity model with per-coefficient
weights |beta_j|^{-gamma} taken from the outcome regression, so features
that do not predict the outcome are pushed out of the propensity model.
The elastic-net variant ("goal") adds a ridge term, implemented by
stacking sqrt(lambda2) * I under the design and rescaling the resulting
coefficients by (1 + lambda2) each outer iteration.

Tuning scans lambda1 = n^c over a fixed exponent grid (and a lambda2 grid
for "goal"); the candidate with the smallest weighted absolute mean
difference wins, with ties resolved toward stronger regularization.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError
from .estimators import PROPENSITY_CLIP, iptw_weights, propensity, wamd
from .solvers import OutcomeFit, weighted_lasso_cd, working_response

SELECTION_TOL = 1e-8
IRLS_TOL = 1e-8
IRLS_MAX_ITER = 100

LAMBDA1_EXPONENTS = (-10.0, -5.0, -2.0, -1.0, -0.75, -0.5, -0.25, 0.25, 0.49)
LAMBDA2_VALUES = (
    0.0,
    10.0**-2,
    10.0**-1.5,
    10.0**-1,
    10.0**-0.75,
    10.0**-0.5,
    10.0**-0.25,
    10.0**0,
    10.0**0.25,
    10.0**0.5,
    10.0**1,
)
METHODS = ("oal", "goal")


@dataclass(frozen=True)
class AdaptiveWeights:
    """Per-coefficient penalty multipliers |beta_j|^{-gamma}, gamma > 1."""

    w: np.ndarray
    gamma: float


@dataclass(frozen=True)
class TuningGrid:
    lambda1_exponents: tuple[float, ...] = LAMBDA1_EXPONENTS
    lambda2_values: tuple[float, ...] = LAMBDA2_VALUES
    gamma_convergence_factor: float = 2.0

    def __post_init__(self):
        if not self.lambda1_exponents or not self.lambda2_values:
            raise ValueError("tuning grids must be non-empty")
        if 0.0 not in self.lambda2_values:
            raise ValueError("lambda2 grid must contain 0")


@dataclass(frozen=True)
class SelectionResult:
    """One fitted propensity model and its tuning context."""

    alpha: np.ndarray
    intercept: float
    lambda1: float
    lambda2: float
    gamma: float
    wamd: float
    method: str
    converged: bool
    selected_mask: np.ndarray

    @property
    def n_selected(self) -> int:
        return int(self.selected_mask.sum())


@dataclass(frozen=True)
class CandidateRecord:
    """Row of the tuning report."""

    method: str
    lambda1: float
    lambda2: float
    gamma: float
    wamd: float
    n_selected: int
    converged: bool


def adaptive_weights(fit: OutcomeFit, gamma: float) -> AdaptiveWeights:
    """|beta_j|^{-gamma}; a zero coefficient yields an infinite weight."""
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    with np.errstate(divide="ignore"):
        w = np.abs(fit.beta) ** (-gamma)
    return AdaptiveWeights(w=w, gamma=float(gamma))


def gamma_for_lambda(c: float, gcf: float = 2.0) -> float:
    """Exponent-matched gamma: 2 * (gcf + 1 - c).

    Keeps lambda1 * n^(gamma/2 - 1) = n^gcf for lambda1 = n^c, which
    requires c < gcf + 1/2 so that gamma stays above 1.
    """
    if c >= gcf + 0.5:
        raise ValueError(f"lambda1 exponent {c} too large for gcf={gcf}")
    return 2.0 * (gcf + 1.0 - c)


def ridge_augmented(X: np.ndarray, lambda2: float):
    """Stack sqrt(lambda2) * I_q under X.

    Returns the augmented design and its intercept column: augmentation
    rows carry no intercept, so only the slopes feel the ridge.
    """
    n, q = X.shape
    X_aug = np.vstack([X, np.sqrt(lambda2) * np.eye(q)])
    intercept_col = np.concatenate([np.ones(n), np.zeros(q)])
    return X_aug, intercept_col


def _mask(alpha: np.ndarray) -> np.ndarray:
    return np.abs(alpha) > SELECTION_TOL


def fit_oal(
    X: np.ndarray,
    A: np.ndarray,
    weights: AdaptiveWeights,
    lambda1: float,
    *,
    fit_intercept: bool = True,
    clip: float = PROPENSITY_CLIP,
) -> SelectionResult:
    """Adaptive-lasso logistic propensity fit at a fixed lambda1.

    IRLS from a zero start: each iteration rebuilds the working response
    at the current coefficients and solves the weighted lasso subproblem
    by coordinate descent. Non-convergence is flagged, not raised.
    """
    alpha, intercept, converged = _irls_loop(
        X, A, weights.w, lambda1, 0.0, fit_intercept, clip
    )
    return SelectionResult(
        alpha=alpha,
        intercept=intercept,
        lambda1=float(lambda1),
        lambda2=0.0,
        gamma=weights.gamma,
        wamd=float("nan"),
        method="oal",
        converged=converged,
        selected_mask=_mask(alpha),
    )


def fit_goal(
    X: np.ndarray,
    A: np.ndarray,
    weights: AdaptiveWeights,
    lambda1: float,
    lambda2: float,
    *,
    fit_intercept: bool = True,
    clip: float = PROPENSITY_CLIP,
) -> SelectionResult:
    """Adaptive-elastic-net propensity fit at fixed (lambda1, lambda2).

    Solves the naive elastic net on the ridge-augmented data inside each
    IRLS step; once the naive coefficients settle, the slopes are
    inflated by (1 + lambda2) to undo the ridge shrinkage. Feeding the
    inflated values back into the reweighting instead makes the iteration
    oscillate for lambda2 around 1 and diverge for large lambda2, so the
    rescale is applied exactly once. With lambda2 = 0 the augmentation
    rows are all zero and the path coincides with :func:`fit_oal`
    exactly.
    """
    if lambda2 < 0:
        raise ValueError("lambda2 must be non-negative")
    alpha, intercept, converged = _irls_loop(
        X, A, weights.w, lambda1, lambda2, fit_intercept, clip
    )
    return SelectionResult(
        alpha=alpha,
        intercept=intercept,
        lambda1=float(lambda1),
        lambda2=float(lambda2),
        gamma=weights.gamma,
        wamd=float("nan"),
        method="goal",
        converged=converged,
        selected_mask=_mask(alpha),
    )


def _irls_loop(X, A, w, lambda1, lambda2, fit_intercept, clip):
    n, q = X.shape
    X_aug, intercept_col = ridge_augmented(X, lambda2)
    z_tail = np.zeros(q)
    t_tail = np.ones(q)

    naive = np.zeros(q)
    intercept = 0.0
    converged = False
    for _ in range(IRLS_MAX_ITER):
        wr = working_response(X, A, naive, intercept, clip)
        inner = weighted_lasso_cd(
            X_aug,
            np.concatenate([wr.z, z_tail]),
            np.concatenate([wr.t, t_tail]),
            w,
            lambda1,
            fit_intercept=fit_intercept,
            intercept_col=intercept_col,
            start_alpha=naive,
            start_intercept=intercept,
        )
        delta = abs(inner.intercept - intercept)
        if q:
            delta = max(delta, float(np.max(np.abs(inner.alpha - naive))))
        naive, intercept = inner.alpha, inner.intercept
        if not inner.converged:
            break
        if delta < IRLS_TOL:
            converged = True
            break
    return (1.0 + lambda2) * naive, intercept, converged


def select_by_wamd(
    X: np.ndarray,
    A: np.ndarray,
    outcome_fit: OutcomeFit,
    grid: TuningGrid,
    method: str,
    *,
    fit_intercept: bool = True,
    clip: float = PROPENSITY_CLIP,
) -> tuple[SelectionResult, list[CandidateRecord]]:
    """Scan the tuning grid and return the balance-optimal fit.

    Every candidate lambda1 = n^c gets its own gamma from
    :func:`gamma_for_lambda`, hence its own adaptive weights. For "goal"
    the scan covers the full lambda2 x lambda1 grid. Only converged
    candidates compete; the minimum wAMD wins and exact ties go to the
    larger lambda1, then the larger lambda2.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    n = X.shape[0]
    beta_abs = np.abs(outcome_fit.beta)
    lambda2_values = grid.lambda2_values if method == "goal" else (0.0,)

    best: SelectionResult | None = None
    best_key: tuple[float, float, float] | None = None
    records: list[CandidateRecord] = []
    failures: list[str] = []
    for lam2 in lambda2_values:
        for c in grid.lambda1_exponents:
            lam1 = float(n**c)
            gamma = gamma_for_lambda(c, grid.gamma_convergence_factor)
            weights = adaptive_weights(outcome_fit, gamma)
            if method == "goal":
                fit = fit_goal(
                    X, A, weights, lam1, lam2,
                    fit_intercept=fit_intercept, clip=clip,
                )
            else:
                fit = fit_oal(
                    X, A, weights, lam1,
                    fit_intercept=fit_intercept, clip=clip,
                )
            pi = propensity(fit.alpha, X, fit.intercept, clip)
            tau = iptw_weights(A, pi)
            balance = wamd(X, A, tau, beta_abs)
            fit = replace(fit, wamd=balance)
            records.append(
                CandidateRecord(
                    method=method,
                    lambda1=fit.lambda1,
                    lambda2=fit.lambda2,
                    gamma=fit.gamma,
                    wamd=balance,
                    n_selected=fit.n_selected,
                    converged=fit.converged,
                )
            )
            if not fit.converged:
                failures.append(
                    f"lambda1={lam1:.6g}, lambda2={lam2:.6g}: did not converge"
                )
                continue
            key = (balance, -fit.lambda1, -fit.lambda2)
            if best_key is None or key < best_key:
                best, best_key = fit, key
    if best is None:
        raise ConvergenceError(
            "no tuning candidate converged: " + "; ".join(failures)
        )
    return best, records
