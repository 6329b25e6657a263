"""Synthetic benchmark scenarios and the replication harness.

Data generation follows a fixed template: equicorrelated standard normal
covariates, a no-intercept logistic treatment model, and a linear outcome
with unit normal noise and a known treatment effect. Four coefficient
scenarios place confounders at columns 1-2, outcome-only predictors at
3-4 and exposure-only predictors at 5-6 (1-based); everything else is
noise.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .data import Dataset, standardize
from .errors import ConvergenceError, DataError
from .estimators import weighted_sample
from .parallel import map_indexed
from .screening import screening_size, sis_screen
from .selection import METHODS, TuningGrid, select_by_wamd
from .solvers import fit_outcome

CONFOUNDERS = (0, 1)
OUTCOME_PREDICTORS = (2, 3)
EXPOSURE_PREDICTORS = (4, 5)

_BETA_BY_SCENARIO = {
    1: (0.6, 0.6, 0.6, 0.6, 0.0, 0.0),
    2: (0.6, 0.6, 0.6, 0.6, 0.0, 0.0),
    3: (0.2, 0.2, 0.6, 0.6, 0.0, 0.0),
    4: (0.6, 0.6, 0.6, 0.6, 0.0, 0.0),
}
_ALPHA_BY_SCENARIO = {
    1: (1.0, 1.0, 0.0, 0.0, 1.0, 1.0),
    2: (0.4, 0.4, 0.0, 0.0, 1.0, 1.0),
    3: (1.0, 1.0, 0.0, 0.0, 1.0, 1.0),
    4: (1.0, 1.0, 0.0, 0.0, 1.8, 1.8),
}


def scenario_coefs(scenario_id: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Outcome and treatment coefficient vectors, zero-padded to length p."""
    if scenario_id not in _BETA_BY_SCENARIO:
        raise ValueError(f"scenario must be 1-4, got {scenario_id}")
    if p < 6:
        raise ValueError("scenarios need p >= 6")
    beta = np.zeros(p)
    alpha = np.zeros(p)
    beta[:6] = _BETA_BY_SCENARIO[scenario_id]
    alpha[:6] = _ALPHA_BY_SCENARIO[scenario_id]
    return beta, alpha


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: int
    n: int
    p: int
    rho: float
    beta: np.ndarray
    alpha: np.ndarray
    beta_A: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if len(self.beta) != self.p or len(self.alpha) != self.p:
            raise ValueError("coefficient vectors must have length p")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")


def make_scenario(
    scenario_id: int, n: int, p: int, rho: float, seed: int = 0, beta_A: float = 0.0
) -> ScenarioConfig:
    beta, alpha = scenario_coefs(scenario_id, p)
    return ScenarioConfig(
        scenario_id=scenario_id, n=n, p=p, rho=rho,
        beta=beta, alpha=alpha, beta_A=beta_A, seed=seed,
    )


def gen_covariates(n: int, p: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Equicorrelated N(0,1) columns via a shared latent factor.

    X_j = sqrt(rho) * Z0 + sqrt(1 - rho) * Z_j gives unit marginal
    variance and exact pairwise correlation rho without any p x p factor.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    shared = rng.standard_normal(n)
    own = rng.standard_normal((n, p))
    return np.sqrt(rho) * shared[:, None] + np.sqrt(1.0 - rho) * own


def gen_treatment(
    X: np.ndarray, alpha: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Bernoulli draws with logit P(A=1) = X @ alpha (no intercept)."""
    return rng.binomial(1, expit(X @ alpha))


def gen_outcome(
    X: np.ndarray,
    A: np.ndarray,
    beta: np.ndarray,
    beta_A: float,
    rng: np.random.Generator,
    noise_scale: float = 1.0,
) -> np.ndarray:
    """Y = beta_A * A + X @ beta + noise, noise ~ N(0, noise_scale^2)."""
    return beta_A * A + X @ beta + noise_scale * rng.standard_normal(X.shape[0])


@dataclass(frozen=True)
class MethodOutcome:
    ate: float
    n_selected: int
    mask: np.ndarray  # over the original p features
    lambda1: float
    lambda2: float
    wamd: float


@dataclass(frozen=True)
class ReplicationResult:
    rep_index: int
    outcomes: dict[str, MethodOutcome] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)
    screened: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))


@dataclass(frozen=True)
class SimulationMetrics:
    bias: float
    se: float
    mse: float
    inclusion: np.ndarray
    n_reps: int
    n_excluded: int


def summarize_metrics(ates, truth: float) -> tuple[float, float, float]:
    """(bias, sample-sd, bias^2 + sd^2) of a vector of estimates."""
    ates = np.asarray(ates, dtype=np.float64)
    if ates.size < 2:
        raise ValueError("need at least 2 estimates to summarize")
    bias = float(ates.mean() - truth)
    se = float(ates.std(ddof=1))
    return bias, se, bias * bias + se * se


def replicate_once(
    config: ScenarioConfig,
    methods: tuple[str, ...],
    rep_index: int,
    grid: TuningGrid | None = None,
    fit_intercept: bool = True,
) -> ReplicationResult:
    """Generate one dataset and push it through screening and each method.

    The random stream is derived from (config.seed, rep_index), so results
    do not depend on which process runs which replication.
    """
    grid = grid or TuningGrid()
    rng = np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(rep_index,))
    )
    X = gen_covariates(config.n, config.p, config.rho, rng)
    A = gen_treatment(X, config.alpha, rng)
    Y = gen_outcome(X, A, config.beta, config.beta_A, rng)
    failures: dict[str, str] = {}
    outcomes: dict[str, MethodOutcome] = {}
    try:
        ds = Dataset(
            X=X, A=A, Y=Y,
            feature_names=tuple(f"X{j + 1}" for j in range(config.p)),
        )
        d_n = screening_size(config.n)
        q = d_n if config.p > d_n else config.p
        screen = sis_screen(ds, q)
        ds_k = standardize(ds.select_features(screen.selected))
        outcome_fit = fit_outcome(ds_k)
    except (DataError, ConvergenceError) as exc:
        return ReplicationResult(
            rep_index=rep_index, failures={m: str(exc) for m in methods}
        )
    for method in methods:
        try:
            chosen, _ = select_by_wamd(
                ds_k.X, ds_k.A, outcome_fit, grid, method,
                fit_intercept=fit_intercept,
            )
            sample = weighted_sample(
                ds_k.X, ds_k.A, ds_k.Y,
                chosen.alpha, chosen.intercept, outcome_fit.beta,
            )
            mask = np.zeros(config.p, dtype=bool)
            mask[screen.selected[chosen.selected_mask]] = True
            outcomes[method] = MethodOutcome(
                ate=sample.ate,
                n_selected=chosen.n_selected,
                mask=mask,
                lambda1=chosen.lambda1,
                lambda2=chosen.lambda2,
                wamd=chosen.wamd,
            )
        except (DataError, ConvergenceError) as exc:
            failures[method] = str(exc)
    return ReplicationResult(
        rep_index=rep_index,
        outcomes=outcomes,
        failures=failures,
        screened=np.sort(screen.selected),
    )


def run_replications(
    config: ScenarioConfig,
    methods: tuple[str, ...] = METHODS,
    reps: int = 1000,
    workers: int = 1,
    grid: TuningGrid | None = None,
    fit_intercept: bool = True,
) -> tuple[dict[str, SimulationMetrics], list[ReplicationResult]]:
    """Run ``reps`` independent replications and aggregate per method.

    Failed replications are excluded from the summaries and counted.
    Aggregation happens in replication order, so the same master seed
    gives bit-identical results at any worker count.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    task = functools.partial(
        replicate_once, config, tuple(methods), grid=grid, fit_intercept=fit_intercept
    )
    results = map_indexed(task, reps, workers)
    metrics: dict[str, SimulationMetrics] = {}
    for method in methods:
        ates = [r.outcomes[method].ate for r in results if method in r.outcomes]
        masks = [r.outcomes[method].mask for r in results if method in r.outcomes]
        excluded = reps - len(ates)
        if len(ates) < 2:
            raise ConvergenceError(
                f"method {method!r}: only {len(ates)} of {reps} replications "
                "succeeded; cannot summarize"
            )
        bias, se, mse = summarize_metrics(ates, config.beta_A)
        metrics[method] = SimulationMetrics(
            bias=bias,
            se=se,
            mse=mse,
            inclusion=np.mean(masks, axis=0),
            n_reps=len(ates),
            n_excluded=excluded,
        )
    return metrics, results
