"""Propensities, inverse-probability weights, balance and the ATE."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import expit

from .errors import DataError

PROPENSITY_CLIP = 1e-6


@dataclass(frozen=True)
class WeightedSample:
    """Fitted propensities with their IPTW weights and summary numbers."""

    pi: np.ndarray
    tau: np.ndarray
    ate: float
    wamd: float


@dataclass(frozen=True)
class PositivityReport:
    """Diagnostics for the positivity assumption; purely descriptive."""

    min_pi_treated: float
    max_pi_treated: float
    min_pi_control: float
    max_pi_control: float
    n_clipped: int
    max_tau: float

    def to_dict(self) -> dict:
        return asdict(self)


def propensity(
    alpha: np.ndarray,
    X: np.ndarray,
    intercept: float = 0.0,
    clip: float = PROPENSITY_CLIP,
) -> np.ndarray:
    """Logistic propensities clipped to [clip, 1 - clip]."""
    return np.clip(expit(intercept + X @ alpha), clip, 1.0 - clip)


def iptw_weights(A: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Unstabilized inverse-probability weights: 1/pi treated, 1/(1-pi) control."""
    A = np.asarray(A)
    return A / pi + (1 - A) / (1.0 - pi)


def ate_iptw(Y: np.ndarray, A: np.ndarray, tau: np.ndarray) -> float:
    """Difference of weight-normalized group means of the outcome."""
    A = np.asarray(A)
    treated = tau * A
    control = tau * (1 - A)
    if treated.sum() == 0 or control.sum() == 0:
        raise DataError("both treatment groups are needed for the ATE")
    return float((treated @ Y) / treated.sum() - (control @ Y) / control.sum())


def wamd(
    X: np.ndarray, A: np.ndarray, tau: np.ndarray, beta_abs: np.ndarray
) -> float:
    """Weighted absolute mean difference over the retained features.

    Each feature's absolute gap between the weight-normalized treated and
    control means is scaled by the magnitude of its outcome-model
    coefficient and summed.
    """
    A = np.asarray(A)
    wt = tau * A
    wc = tau * (1 - A)
    if wt.sum() == 0 or wc.sum() == 0:
        raise DataError("both treatment groups are needed for the balance metric")
    gap = X.T @ wt / wt.sum() - X.T @ wc / wc.sum()
    return float(np.abs(beta_abs) @ np.abs(gap))


def weighted_sample(
    X: np.ndarray,
    A: np.ndarray,
    Y: np.ndarray,
    alpha: np.ndarray,
    intercept: float,
    beta_abs: np.ndarray,
    clip: float = PROPENSITY_CLIP,
) -> WeightedSample:
    """Propensities, weights, balance and ATE for one fitted model."""
    pi = propensity(alpha, X, intercept, clip)
    tau = iptw_weights(A, pi)
    return WeightedSample(
        pi=pi,
        tau=tau,
        ate=ate_iptw(Y, A, tau),
        wamd=wamd(X, A, tau, np.abs(beta_abs)),
    )


def positivity_report(
    pi: np.ndarray, A: np.ndarray, clip: float = PROPENSITY_CLIP
) -> PositivityReport:
    """Min/max propensities per group, clipped count and the largest weight."""
    A = np.asarray(A)
    pi = np.asarray(pi)
    pi1, pi0 = pi[A == 1], pi[A == 0]
    tau = iptw_weights(A, pi)
    at_bound = (pi <= clip) | (pi >= 1.0 - clip)
    return PositivityReport(
        min_pi_treated=float(pi1.min()) if pi1.size else float("nan"),
        max_pi_treated=float(pi1.max()) if pi1.size else float("nan"),
        min_pi_control=float(pi0.min()) if pi0.size else float("nan"),
        max_pi_control=float(pi0.max()) if pi0.size else float("nan"),
        n_clipped=int(at_bound.sum()),
        max_tau=float(tau.max()),
    )
