"""Shared fixtures and independent reference solvers for the test suite.

The reference implementations here deliberately avoid the package's
solver paths (dense linear algebra instead of coordinate descent) so the
two routes cross-check each other.
"""

import numpy as np
import pytest
from scipy.special import expit

from hdcausal.data import Dataset


def newton_logistic_mle(X, A, tol=1e-12, max_iter=200):
    """Unpenalized logistic MLE with intercept via dense Newton steps."""
    M = np.column_stack([np.ones(len(A)), X])
    beta = np.zeros(M.shape[1])
    for _ in range(max_iter):
        p = expit(M @ beta)
        hess = (M * (p * (1 - p))[:, None]).T @ M
        step = np.linalg.solve(hess, M.T @ (A - p))
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            break
    return beta[0], beta[1:]


def dense_weighted_ls(X, z, t):
    """Weighted least squares with intercept by normal equations."""
    M = np.column_stack([np.ones(len(z)), X])
    coef = np.linalg.solve((M * t[:, None]).T @ M, (M * t[:, None]).T @ z)
    return coef[0], coef[1:]


def ridge_logistic_rescaled(X, A, lam2, clip=1e-6, tol=1e-12, max_iter=1000):
    """Ridge-penalized logistic fit (slope penalty lam2/2, unpenalized
    intercept) by dense IRLS, then slopes inflated by (1 + lam2)."""
    n, q = X.shape
    M = np.column_stack([np.ones(n), X])
    D = np.eye(q + 1)
    D[0, 0] = 0.0
    coef = np.zeros(q + 1)
    for _ in range(max_iter):
        lp = M @ coef
        p = np.clip(expit(lp), clip, 1 - clip)
        t = p * (1 - p)
        z = lp + (A - p) / t
        new = np.linalg.solve((M * t[:, None]).T @ M + lam2 * D, (M * t[:, None]).T @ z)
        if np.max(np.abs(new - coef)) < tol:
            coef = new
            break
        coef = new
    return coef[0], (1 + lam2) * coef[1:]


def logit_instance(seed, n=200, q=10, signal=(1.0, -0.5, 0.8, 0.0, 0.0, 0.3)):
    """Random non-separable logistic design with a few true signals."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, q))
    alpha = np.zeros(q)
    alpha[: len(signal)] = signal
    A = rng.binomial(1, expit(X @ alpha))
    if A.min() == A.max():  # pragma: no cover - never happens at these sizes
        raise RuntimeError("degenerate draw")
    return X, A


@pytest.fixture
def toy_dataset():
    rng = np.random.default_rng(42)
    n, p = 60, 8
    X = rng.standard_normal((n, p))
    A = rng.binomial(1, expit(0.8 * X[:, 0]))
    Y = 0.5 * X[:, 0] + 0.7 * X[:, 1] + rng.standard_normal(n)
    return Dataset(
        X=X, A=A, Y=Y, feature_names=tuple(f"X{j + 1}" for j in range(p))
    )
