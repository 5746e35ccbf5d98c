"""Covered-information-corrected feature importance."""

from ._core import (
    BayesianLinearRegressor,
    EntropyProfile,
    ErtParams,
    ExtremelyRandomizedTreesRegressor,
    ImportanceEstimate,
    PrecisionModel,
    RunConfig,
    SubsampleSet,
    TabularDataset,
    cid_importance,
    covered_info_row,
    default_rho_grid,
    discretize,
    empirical_covariance,
    generate_toy,
    graphical_lasso,
    load_csv,
    local_mutual_info,
    local_mutual_info_model,
    make_subsamples,
    oracle_check,
    oracle_covered_info,
    permutation_importance,
    precision_to_json,
    quantile_gaussianize,
    run_rank,
    save_csv,
    select_rho_cv,
    trim_outliers,
    univariate_importance,
)

__version__ = "0.1.0"

__all__ = [
    "BayesianLinearRegressor",
    "EntropyProfile",
    "ErtParams",
    "ExtremelyRandomizedTreesRegressor",
    "ImportanceEstimate",
    "PrecisionModel",
    "RunConfig",
    "SubsampleSet",
    "TabularDataset",
    "cid_importance",
    "covered_info_row",
    "default_rho_grid",
    "discretize",
    "empirical_covariance",
    "generate_toy",
    "graphical_lasso",
    "load_csv",
    "local_mutual_info",
    "local_mutual_info_model",
    "make_subsamples",
    "oracle_check",
    "oracle_covered_info",
    "permutation_importance",
    "precision_to_json",
    "quantile_gaussianize",
    "run_rank",
    "save_csv",
    "select_rho_cv",
    "trim_outliers",
    "univariate_importance",
]
