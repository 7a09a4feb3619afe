"""Conditional Shapley value explanations for tabular models, with a
benchmark of per-instance explanation precision."""

from .coalition import Coalition, enumerate_coalitions, masked_merge, shapley_weight
from .config import EstimatorConfig, ExperimentConfig, load_config
from .evaluation import (
    EvaluationReport,
    build_report,
    distance_to_center,
    mae,
    rank_agreement,
    spearman,
    tukey_outliers,
)
from .mc_estimators import (
    EmpiricalSampler,
    GaussianSampler,
    IndependenceSampler,
    MonteCarloEstimator,
    estimate_v_mc,
    gaussian_condition,
)
from .model import BasisModel, LinearModel, analytic_model, fit_basis_model
from .reg_estimators import estimate_v_reg, fit_separate, fit_surrogate
from .runner import explain_single, run_experiment
from .shapley_engine import (
    ContributionTable,
    ExactGaussianTruth,
    Explanation,
    aggregate,
    exact_shapley,
    explain_many,
    explain_observation,
    true_shapley,
)
from .simdata import (
    Dataset,
    GaussianParams,
    ResponseCoefficients,
    interaction_g,
    make_ar_covariance,
    reference_setup,
    response_mean,
    sample_dataset,
)

__version__ = "0.1.0"
