"""Partially regularized least squares interpolation for wide designs.

The package splits a wide design ``X = [W | T]`` and studies the
interpolating fit whose W-block coefficients have minimum l2 norm while the
T-block stays unpenalized: closed-form coefficients and their algebraic
cross-checks, long/short/auxiliary omitted-variable identities, exact
leave-one-out refits and residuals, four homoskedastic noise-variance
estimators with exact bias formulas, and a deterministic simulation harness
for finite-sample bias studies of those estimators.
"""

from .cochran import (
    AuxFit,
    CochranDesign,
    CochranGaps,
    LongFit,
    OvbDecomposition,
    ShortFit,
    cochran_check,
    fit_aux,
    fit_long,
    fit_short,
    image_gap,
    ovb_decompose,
)
from .dgp import (
    COVARIATE_MODELS,
    CovariateConfig,
    Seed,
    gen_ate_dataset,
    gen_ate_design,
    gen_covariates,
    gen_response,
    orthonormal_rows,
    splitmix64,
    standard_normal,
)
from .exceptions import (
    ExperimentAbortedError,
    InvalidInputError,
    PregolsError,
    RankAssumptionError,
)
from .interpolators import (
    PARTIAL_VARIANTS,
    DesignPartition,
    FullFit,
    PartialFit,
    fit_full,
    fit_partial,
    fit_partial_variant,
    fit_partial_variants,
    predict,
)
from .linalg import (
    RankTolerance,
    complement_projector,
    get_default_tolerance,
    gram_inverse,
    numeric_rank,
    nullspace_component,
    pinv,
    projector,
    read_matrix_csv,
    set_default_tolerance,
    write_matrix_csv,
)
from .loo import (
    LooProjector,
    LooRecord,
    PartialLooSolver,
    brute_force_refit,
    gram_downdate,
    loo_fit,
    loo_projector,
    loo_record,
    loo_residual_partial,
    loo_residuals_full,
    loo_residuals_partial,
)
from .simharness import (
    DEFAULT_GRIDS,
    EXPERIMENTS,
    CellResult,
    ExperimentConfig,
    ExperimentReport,
    run_ate,
    run_experiment,
    write_report,
)
from .variance import (
    ESTIMATOR_IDS,
    GaussMarkovTruth,
    ResidualOperator,
    VarianceReport,
    expected_bias,
    full_operator,
    partial_operator,
    sigma2_full,
    sigma2_partial,
    sigma2_w,
    sigma2_wc,
    w_operator,
    wc_normalizers,
    wc_operator,
)

__version__ = "0.1.0"

__all__ = [
    "AuxFit",
    "CellResult",
    "CochranDesign",
    "CochranGaps",
    "COVARIATE_MODELS",
    "CovariateConfig",
    "DEFAULT_GRIDS",
    "DesignPartition",
    "ESTIMATOR_IDS",
    "EXPERIMENTS",
    "ExperimentAbortedError",
    "ExperimentConfig",
    "ExperimentReport",
    "FullFit",
    "GaussMarkovTruth",
    "InvalidInputError",
    "LongFit",
    "LooProjector",
    "LooRecord",
    "OvbDecomposition",
    "PARTIAL_VARIANTS",
    "PartialFit",
    "PartialLooSolver",
    "PregolsError",
    "RankAssumptionError",
    "RankTolerance",
    "ResidualOperator",
    "Seed",
    "ShortFit",
    "VarianceReport",
    "brute_force_refit",
    "cochran_check",
    "complement_projector",
    "expected_bias",
    "fit_aux",
    "fit_full",
    "fit_long",
    "fit_partial",
    "fit_partial_variant",
    "fit_partial_variants",
    "fit_short",
    "full_operator",
    "gen_ate_dataset",
    "gen_ate_design",
    "gen_covariates",
    "gen_response",
    "get_default_tolerance",
    "gram_downdate",
    "gram_inverse",
    "image_gap",
    "loo_fit",
    "loo_projector",
    "loo_record",
    "loo_residual_partial",
    "loo_residuals_full",
    "loo_residuals_partial",
    "numeric_rank",
    "nullspace_component",
    "orthonormal_rows",
    "ovb_decompose",
    "partial_operator",
    "pinv",
    "predict",
    "projector",
    "read_matrix_csv",
    "run_ate",
    "run_experiment",
    "set_default_tolerance",
    "sigma2_full",
    "sigma2_partial",
    "sigma2_w",
    "sigma2_wc",
    "splitmix64",
    "standard_normal",
    "w_operator",
    "wc_normalizers",
    "wc_operator",
    "write_matrix_csv",
    "write_report",
]
