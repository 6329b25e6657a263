"""Marginal feature screening via the conditional ball covariance.

Each feature is scored by a treatment-group-weighted dependence measure
between the feature and the outcome, built from closed-ball membership
indicators; the q highest-scoring features survive. The production score
uses an O(m^3)-per-group factored computation; a literal six-index
brute-force version is kept as an independent cross-check for small
groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import ball_group_term, ball_scores
from .data import Dataset
from .errors import DataError

BRUTE_FORCE_GROUP_LIMIT = 12


@dataclass(frozen=True)
class ScreeningResult:
    """Scores and the retained top-q index set.

    ``order`` ranks all features by descending score with ties broken by
    lower index; ``selected`` is its first q entries.
    """

    scores: np.ndarray
    order: np.ndarray
    selected: np.ndarray
    q: int
    w_hat: float


def ball_membership(center: float, radius_point: float, candidate: float) -> int:
    """1 iff ``candidate`` lies in the closed ball around ``center``
    whose radius is the distance from ``center`` to ``radius_point``."""
    return int(abs(candidate - center) <= abs(radius_point - center))


def _split_groups(x: np.ndarray, y: np.ndarray, a: np.ndarray):
    a = np.asarray(a)
    treated = a == 1
    x1, y1 = x[treated], y[treated]
    x0, y0 = x[~treated], y[~treated]
    if x1.shape[0] < 2 or x0.shape[0] < 2:
        raise DataError("each treatment group needs at least 2 observations")
    return x1, y1, x0, y0


def conditional_ball_cov_sq(x, y, a) -> float:
    """Squared conditional ball covariance of one feature with the outcome.

    Group terms are combined with weights n1/n and n0/n. Zero exactly when
    the feature is constant within each treatment group.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x1, y1, x0, y0 = _split_groups(x, y, a)
    w_hat = x1.shape[0] / x.shape[0]
    return float(
        w_hat * ball_group_term(x1, y1) + (1.0 - w_hat) * ball_group_term(x0, y0)
    )


def _group_term_bruteforce(x: np.ndarray, y: np.ndarray) -> float:
    # Literal six-index sum: for each anchor pair (i, j), accumulate
    # xi^X * xi^Y over all (k, l, s, t), where
    # xi_{ij,klst} = (d_{ij,kl} + d_{ij,st} - d_{ij,ks} - d_{ij,lt}) / 2
    # and d_{ij,kl} = d_{ij,k} * d_{ij,l} from ball membership indicators.
    m = x.shape[0]
    total = 0.0
    for i in range(m):
        for j in range(m):
            u = (np.abs(x - x[i]) <= abs(x[j] - x[i])).astype(np.float64)
            v = (np.abs(y - y[i]) <= abs(y[j] - y[i])).astype(np.float64)
            ukl = np.outer(u, u)
            vkl = np.outer(v, v)
            xi_x = (
                ukl[:, :, None, None]
                + ukl[None, None, :, :]
                - ukl[:, None, :, None]
                - ukl[None, :, None, :]
            ) / 2.0
            xi_y = (
                vkl[:, :, None, None]
                + vkl[None, None, :, :]
                - vkl[:, None, :, None]
                - vkl[None, :, None, :]
            ) / 2.0
            total += float((xi_x * xi_y).sum())
    return total / m**6


def conditional_ball_cov_sq_bruteforce(x, y, a, group_limit=BRUTE_FORCE_GROUP_LIMIT):
    """O(m^6) reference value of :func:`conditional_ball_cov_sq`.

    Evaluates the six-index definition directly; refuses groups larger
    than ``group_limit`` to keep the cost bounded.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x1, y1, x0, y0 = _split_groups(x, y, a)
    for grp in (x1, x0):
        if grp.shape[0] > group_limit:
            raise DataError(
                f"group of size {grp.shape[0]} too large for brute force "
                f"(limit {group_limit})"
            )
    w_hat = x1.shape[0] / x.shape[0]
    return float(
        w_hat * _group_term_bruteforce(x1, y1)
        + (1.0 - w_hat) * _group_term_bruteforce(x0, y0)
    )


def screening_size(n: int) -> int:
    """Number of features to retain for a sample of size n: floor(n / ln n)."""
    if n < 3:
        raise ValueError("screening size needs n >= 3")
    return int(n / math.log(n))


def sis_screen(d: Dataset, q: int) -> ScreeningResult:
    """Keep the q features with the largest conditional ball covariance.

    Ties are broken toward the lower feature index, making the ranking
    total and deterministic; screening with a larger q therefore always
    extends the selected set.
    """
    if not 1 <= q <= d.p:
        raise DataError(f"q must be in [1, p={d.p}], got {q}")
    treated = d.A == 1
    if treated.sum() < 2 or (~treated).sum() < 2:
        raise DataError("each treatment group needs at least 2 observations")
    X1 = np.asfortranarray(d.X[treated])
    X0 = np.asfortranarray(d.X[~treated])
    y1 = np.ascontiguousarray(d.Y[treated])
    y0 = np.ascontiguousarray(d.Y[~treated])
    w_hat = X1.shape[0] / d.n
    scores = ball_scores(X1, y1, X0, y0, w_hat)
    order = np.lexsort((np.arange(d.p), -scores))
    return ScreeningResult(
        scores=scores,
        order=order,
        selected=order[:q].copy(),
        q=q,
        w_hat=w_hat,
    )
