"""Variable selection for high-dimensional linear regression.

The core idea: measure each predictor's association with the response
after projecting out the predictors it is highly correlated with, where
"highly" is decided by an FDR-calibrated hard threshold on the sample
correlation matrix. An iterative screening algorithm builds a solution
path from these tilted correlations and an extended BIC picks the final
model. Forward selection, forward regression, one-shot marginal screening,
and a simplified PC-style partial-correlation filter are included as
baselines, together with seeded simulation designs and FP/FN/L2/ROC
scoring.
"""

__version__ = "0.1.0"

from .baselines import (
    BaselineConfig,
    BaselineMethod,
    forward_regression,
    forward_selection,
    marginal_screening,
    marginal_screening_path,
    pc_simple,
)
from .bench import BenchmarkConfig, run_benchmark, write_outputs
from .linalg import (
    DegenerateColumn,
    DesignMatrix,
    IndexOverlap,
    NonFinite,
    ProjectionBasis,
    Response,
    TooManyColumns,
    build_projection,
    normalize_columns,
    project,
    response_partial_correlation,
    sample_partial_correlation,
)
from .metrics import (
    DimensionMismatch,
    SelectionReport,
    aggregate,
    averaged_roc,
    score,
    score_selection,
    summary_rows,
)
from .simulate import (
    ModelKind,
    NotPositiveDefinite,
    SimSpec,
    SingularSupportGram,
    TrueModel,
    ZeroSignal,
    calibrate_noise,
    fan_covariance,
    generate_coefficients,
    generate_design,
    generate_replicate,
)
from .tcs import (
    NoCandidates,
    PathStep,
    Rescaling,
    SelectionMode,
    SolutionPath,
    TcsConfig,
    WorkingState,
    advance_state,
    extended_bic,
    fit_final_coefficients,
    initial_state,
    run_tcs,
    tcs_step,
)
from .thresholding import (
    NullReferenceConfig,
    ThresholdEstimate,
    benjamini_hochberg_threshold,
    empirical_p_values,
    estimate_threshold,
    generate_null_reference,
)
from .tilting import ConditioningSet, TiltedStats, conditioning_set, tilt, tilted_correlations_all

__all__ = [name for name in dir() if not name.startswith("_")]
