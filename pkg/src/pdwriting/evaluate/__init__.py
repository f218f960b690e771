"""LOOCV grid search, metrics, hypothesis tests and frozen validation."""

from .audit import CallAudit, call_audit
from .dataset import Dataset, binary_dataset, staging_dataset
from .loocv import (
    DEFAULT_GRIDS,
    POWERS_OF_TEN,
    EvalReport,
    StagingReport,
    expand_grid,
    loocv_accuracy,
    loocv_grid_search,
    loocv_predict,
    loocv_scores,
    loocv_staging,
    parse_grid,
    select_best,
)
from .metrics import (
    BinaryMetrics,
    ConfusionMatrix,
    RocCurve,
    binary_metrics,
    cohen_kappa,
    cohen_kappa_flagged,
    macro_f1,
    roc_curve,
)
from .stats import TestResult, kruskal_wallis, welch_t
from .validation import IdOverlapError, check_disjoint, frozen_validation

__all__ = [
    "BinaryMetrics", "CallAudit", "ConfusionMatrix", "DEFAULT_GRIDS", "Dataset", "EvalReport",
    "IdOverlapError", "POWERS_OF_TEN", "RocCurve", "StagingReport", "TestResult", "binary_dataset",
    "binary_metrics", "call_audit", "check_disjoint", "cohen_kappa", "cohen_kappa_flagged",
    "expand_grid", "frozen_validation", "kruskal_wallis", "loocv_accuracy", "loocv_grid_search",
    "loocv_predict", "loocv_scores", "loocv_staging", "macro_f1", "parse_grid", "roc_curve",
    "select_best", "staging_dataset", "welch_t",
]
