"""Individual treatment effect estimation with invariant risk minimization.

Estimates heterogeneous effects from a single observational dataset by
splitting it into artificial domains and fitting IRMv1-penalized linear
base-learners inside T-learner and S-learner frameworks, alongside closed-form
OLS baselines, with synthetic generators and a PEHE benchmarking harness.
"""

from .datagen import CovarianceSet, Dataset, GenSpec, OutcomeParams, generate
from .domains import DomainAssignment, partition, split_for_estimation, split_random
from .evaluation import EvalReport, evaluate_estimator, group_classification_accuracy, pehe
from .harness import ExperimentConfig, ResultRecord, run, run_once, sweep_accuracy, sweep_dimension
from .learners import IrmConfig, LinearModel, irm_fit, irm_penalty, ols_fit, risk
from .metalearners import SLearner, TLearner, fit_s_learner, fit_t_learner, predict_ite
from .numerics import Rng

__all__ = [
    "CovarianceSet", "Dataset", "DomainAssignment", "EvalReport",
    "ExperimentConfig", "GenSpec", "IrmConfig", "LinearModel", "OutcomeParams",
    "ResultRecord", "Rng", "SLearner", "TLearner", "evaluate_estimator",
    "fit_s_learner", "fit_t_learner", "generate", "group_classification_accuracy",
    "irm_fit", "irm_penalty", "ols_fit", "partition", "pehe", "predict_ite",
    "risk", "run", "run_once", "split_for_estimation", "split_random",
    "sweep_accuracy", "sweep_dimension",
]

__version__ = "0.1.0"
