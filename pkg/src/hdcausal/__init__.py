"""Confounder selection and IPTW effect estimation for wide tabular data.

Workflow: screen features by conditional ball covariance, drop redundant
columns, fit an adaptive-lasso or adaptive-elastic-net propensity model
tuned by weighted covariate balance, then estimate the average treatment
effect with normalized inverse-probability weights. A simulation harness
and a full-pipeline bootstrap cover calibration and inference.
"""

from .bootstrap import (
    BootstrapResult,
    TrimmedSummary,
    bootstrap_ate,
    feature_inclusion,
    normal_ci,
    trimmed_summary,
)
from .data import (
    ColumnRoles,
    Dataset,
    FeatureMeta,
    correlation_filter,
    drop_constant_features,
    load_csv,
    standardize,
    write_csv,
)
from .errors import ConvergenceError, DataError
from .estimators import (
    PositivityReport,
    WeightedSample,
    ate_iptw,
    iptw_weights,
    positivity_report,
    propensity,
    wamd,
    weighted_sample,
)
from .screening import (
    ScreeningResult,
    ball_membership,
    conditional_ball_cov_sq,
    conditional_ball_cov_sq_bruteforce,
    screening_size,
    sis_screen,
)
from .selection import (
    AdaptiveWeights,
    CandidateRecord,
    SelectionResult,
    TuningGrid,
    adaptive_weights,
    fit_goal,
    fit_oal,
    gamma_for_lambda,
    ridge_augmented,
    select_by_wamd,
)
from .simulate import (
    ReplicationResult,
    ScenarioConfig,
    SimulationMetrics,
    gen_covariates,
    gen_outcome,
    gen_treatment,
    make_scenario,
    run_replications,
    scenario_coefs,
    summarize_metrics,
)
from .solvers import (
    LassoFit,
    OutcomeFit,
    WorkingResponse,
    fit_outcome,
    soft_threshold,
    weighted_lasso_cd,
    working_response,
)

__version__ = "0.1.0"
