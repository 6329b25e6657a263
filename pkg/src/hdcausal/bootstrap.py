"""Nonparametric bootstrap of the full selection-plus-estimation pipeline.

Each resample draws n rows with replacement and refits everything
downstream of screening: standardization, the outcome model, the adaptive
weights, the wAMD tuning scan and the final weighted ATE. The feature set
itself (screening and redundancy filtering) stays fixed from the full-data
pass, so inclusion frequencies are comparable across resamples.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .data import Dataset, standardize
from .errors import ConvergenceError, DataError
from .estimators import weighted_sample
from .parallel import map_indexed
from .selection import TuningGrid, select_by_wamd
from .solvers import fit_outcome

Z_95 = 1.96


@dataclass(frozen=True)
class BootstrapResult:
    point: float
    B: int
    resample_ates: np.ndarray
    boot_mean: float
    bias: float
    se: float
    mse: float
    ci: tuple[float, float]
    ci_length: float
    inclusion_freq: np.ndarray
    excluded: int


@dataclass(frozen=True)
class TrimmedSummary:
    n_input: int
    n_retained: int
    mean: float
    sd: float


def normal_ci(point: float, se: float, level: float = 0.95) -> tuple[float, float]:
    """Normal interval centered at the point estimate: point +/- z * se."""
    if se < 0:
        raise ValueError("se must be non-negative")
    z = Z_95 if level == 0.95 else float(norm.ppf(0.5 + level / 2.0))
    return (point - z * se, point + z * se)


def trimmed_summary(values, lower_pct: float, upper_pct: float) -> TrimmedSummary:
    """Mean/sd over the middle slice of the sorted values.

    Keeps sorted positions [floor(n * lower_pct / 100),
    ceil(n * upper_pct / 100)), so trimming 10/90 over 10000 values retains
    exactly 8000 and trimming 0/100 retains everything.
    """
    if not 0 <= lower_pct < upper_pct <= 100:
        raise ValueError("need 0 <= lower_pct < upper_pct <= 100")
    values = np.sort(np.asarray(values, dtype=np.float64))
    n = values.size
    lo = int(np.floor(n * lower_pct / 100.0))
    hi = int(np.ceil(n * upper_pct / 100.0))
    kept = values[lo:hi]
    if kept.size == 0:
        raise ValueError("trimming removed every value")
    sd = float(kept.std(ddof=1)) if kept.size > 1 else 0.0
    return TrimmedSummary(
        n_input=n, n_retained=int(kept.size), mean=float(kept.mean()), sd=sd
    )


def feature_inclusion(masks) -> np.ndarray:
    """Column-wise selection frequency over a stack of boolean masks."""
    masks = np.asarray(masks)
    if masks.ndim != 2 or masks.shape[0] == 0:
        raise ValueError("need a non-empty stack of equal-length masks")
    return masks.mean(axis=0)


def _fit_once(d: Dataset, method: str, grid: TuningGrid, fit_intercept: bool,
              clip: float):
    outcome_fit = fit_outcome(d)
    chosen, _ = select_by_wamd(
        d.X, d.A, outcome_fit, grid, method,
        fit_intercept=fit_intercept, clip=clip,
    )
    sample = weighted_sample(
        d.X, d.A, d.Y, chosen.alpha, chosen.intercept, outcome_fit.beta, clip
    )
    return sample.ate, chosen.selected_mask


def _one_resample(
    d: Dataset,
    method: str,
    grid: TuningGrid,
    fit_intercept: bool,
    clip: float,
    seed: int,
    b: int,
):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
    rows = rng.integers(0, d.n, size=d.n)
    try:
        resample = standardize(d.take_rows(rows))
        ate, mask = _fit_once(resample, method, grid, fit_intercept, clip)
        return ate, mask, None
    except (DataError, ConvergenceError) as exc:
        return None, None, str(exc)


def bootstrap_ate(
    d: Dataset,
    method: str,
    B: int,
    seed: int,
    *,
    grid: TuningGrid | None = None,
    fit_intercept: bool = True,
    clip: float = 1e-6,
    workers: int = 1,
    sampler=None,
) -> BootstrapResult:
    """Point estimate plus a B-resample normal confidence interval.

    ``d`` must already be standardized and reduced to the features kept by
    the full-data pass. Resamples that degenerate (single treatment level,
    constant column, no converging tuning candidate) are skipped and
    counted in ``excluded``. The interval is centered at the full-data
    point estimate. ``sampler(rng, n)``, when given, overrides the row
    resampler (serial path only; meant for tests).
    """
    if B < 2:
        raise ValueError("B must be at least 2")
    grid = grid or TuningGrid()
    point, _ = _fit_once(d, method, grid, fit_intercept, clip)

    if sampler is not None:
        outcomes = []
        for b in range(B):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
            rows = np.asarray(sampler(rng, d.n))
            try:
                resample = standardize(d.take_rows(rows))
                ate, mask = _fit_once(resample, method, grid, fit_intercept, clip)
                outcomes.append((ate, mask, None))
            except (DataError, ConvergenceError) as exc:
                outcomes.append((None, None, str(exc)))
    else:
        task = functools.partial(
            _one_resample, d, method, grid, fit_intercept, clip, seed
        )
        outcomes = map_indexed(task, B, workers)

    ates = np.array([o[0] for o in outcomes if o[2] is None], dtype=np.float64)
    masks = [o[1] for o in outcomes if o[2] is None]
    excluded = B - ates.size
    if ates.size < 2:
        raise ConvergenceError(
            f"only {ates.size} of {B} bootstrap resamples succeeded"
        )
    boot_mean = float(ates.mean())
    se = float(ates.std(ddof=1))
    bias = boot_mean - point
    ci = normal_ci(point, se)
    return BootstrapResult(
        point=point,
        B=B,
        resample_ates=ates,
        boot_mean=boot_mean,
        bias=bias,
        se=se,
        mse=bias * bias + se * se,
        ci=ci,
        ci_length=ci[1] - ci[0],
        inclusion_freq=feature_inclusion(np.array(masks)),
        excluded=excluded,
    )
