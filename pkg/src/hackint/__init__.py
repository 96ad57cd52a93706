"""Hacking intervals for common statistical models."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .data import Dataset, ingest_csv, read_columns
from .errors import (
    DataError,
    DualStall,
    HackintError,
    InfeasibleThetaError,
    NoFeasiblePoint,
    NoFeasibleSample,
    SolverDegradedError,
    ThetaBelowMinLoss,
)
from .inference import (
    GenBoundInput,
    LossBudget,
    Policy,
    ProfileSpec,
    ate_bound_variance,
    classical_ci_equivalence_check,
    classical_theta,
    generalization_bound,
    loss_threshold_from_profile,
    profile_theta,
    resolve_theta,
)
from .interval import HackingInterval
from .kernel import KernelOptions, MetricKernelSpec, kernel_hacking_interval, kernel_loss, kernel_predict
from .oracle import OracleBudget, brute_force_interval
from .pca import PcaHackReport, PcaSubsetQuery, pca_scores, subset_hacking_report, subset_loss
from .prescriptive import (
    FeatureHackConstraints,
    KnnSpec,
    adjustment_factor,
    knn_interval,
    knn_select_kstar,
    new_feature_interval,
    new_feature_sweep,
)
from .regression import OlsFit, ate_interval, fit_ols, ite_interval, linear_stat_interval, prediction_interval
from .svm import SignClass, svm_hacking_interval, svm_interval_batch, svm_min_loss

__all__ = [
    "BACKEND",
    "Dataset",
    "DataError",
    "DualStall",
    "FeatureHackConstraints",
    "GenBoundInput",
    "HackingInterval",
    "HackintError",
    "InfeasibleThetaError",
    "KernelOptions",
    "KnnSpec",
    "LossBudget",
    "MetricKernelSpec",
    "NoFeasiblePoint",
    "NoFeasibleSample",
    "OlsFit",
    "OracleBudget",
    "PcaHackReport",
    "PcaSubsetQuery",
    "Policy",
    "ProfileSpec",
    "SignClass",
    "SolverDegradedError",
    "ThetaBelowMinLoss",
    "adjustment_factor",
    "ate_bound_variance",
    "ate_interval",
    "brute_force_interval",
    "classical_ci_equivalence_check",
    "classical_theta",
    "fit_ols",
    "generalization_bound",
    "ingest_csv",
    "ite_interval",
    "kernel_hacking_interval",
    "kernel_loss",
    "kernel_predict",
    "knn_interval",
    "knn_select_kstar",
    "linear_stat_interval",
    "loss_threshold_from_profile",
    "new_feature_interval",
    "new_feature_sweep",
    "pca_scores",
    "prediction_interval",
    "profile_theta",
    "read_columns",
    "resolve_theta",
    "subset_hacking_report",
    "subset_loss",
    "svm_hacking_interval",
    "svm_interval_batch",
    "svm_min_loss",
]
