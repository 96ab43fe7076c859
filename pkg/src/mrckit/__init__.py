"""Minimax risk classification under generalized maximum entropy.

Learns classifiers that minimize worst-case expected loss over a box of
feature-expectation constraints, for 0-1, log, and alpha losses, and reports
upper and lower risk bounds computed at training time.
"""

from .bounds import (
    bound_report,
    generalization_slack,
    lower_bound,
    upper_bound,
    worst_case_risk,
)
from .core import (
    AlphaLoss,
    BoundReport,
    ConstraintAtoms,
    Dataset,
    ExpectationBox,
    FeatureMap,
    LogLoss,
    LogRelativeLoss,
    MrcModel,
    ZeroOneLoss,
    beta_of_alpha,
)
from .entropies import (
    ExplicitDistribution,
    closed_form_entropy,
    empirical_risk,
    entropy_by_minimization,
    score,
)
from .features import (
    StumpSpec,
    constraint_atoms,
    estimate_expectations,
    fit_thresholds,
    hoeffding_widths,
)
from .marginals import train_adversarial01, train_logreg
from .predictors import (
    predict_alpha,
    predict_labels,
    predict_log,
    predict_probs,
    predict_zero_one,
)
from .solver import (
    SolverConfig,
    train_mrc,
    train_zero_one_exact,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaLoss",
    "BoundReport",
    "ConstraintAtoms",
    "Dataset",
    "ExpectationBox",
    "ExplicitDistribution",
    "FeatureMap",
    "LogLoss",
    "LogRelativeLoss",
    "MrcModel",
    "SolverConfig",
    "StumpSpec",
    "ZeroOneLoss",
    "beta_of_alpha",
    "bound_report",
    "closed_form_entropy",
    "constraint_atoms",
    "empirical_risk",
    "entropy_by_minimization",
    "estimate_expectations",
    "fit_thresholds",
    "generalization_slack",
    "hoeffding_widths",
    "lower_bound",
    "predict_alpha",
    "predict_labels",
    "predict_log",
    "predict_probs",
    "predict_zero_one",
    "score",
    "train_adversarial01",
    "train_logreg",
    "train_mrc",
    "train_zero_one_exact",
    "upper_bound",
    "worst_case_risk",
]
