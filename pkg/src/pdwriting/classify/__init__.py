"""Classifiers: KNN, RBF SVM (SMO), random forest and one-vs-all staging."""

from __future__ import annotations

import json

from .forest import ForestModel, rf_train
from .knn import KNNModel, knn_predict, knn_train
from .multiclass import OVAModel, ova_multiclass_train, ova_predict
from .params import FAMILIES, KNNParams, RFParams, SVMParams, params_from_dict, params_to_dict
from .scaling import Standardization, standardize_apply, standardize_fit
from .svm import ConvergenceWarning, SVMModel, dual_objective, rbf_kernel, solve_dual, svm_decision, svm_train

_MODELS = {"knn": KNNModel, "svm": SVMModel, "rf": ForestModel, "ova": OVAModel}


def train(params, X, y, seed: int = 0, standardize: bool = True):
    """Fit the family named by ``params``. RF ignores ``standardize``."""
    if isinstance(params, KNNParams):
        return knn_train(X, y, params.k, standardize=standardize)
    if isinstance(params, SVMParams):
        return svm_train(X, y, params.c, params.gamma, seed=seed, standardize=standardize)
    if isinstance(params, RFParams):
        return rf_train(X, y, params.n_trees, params.max_depth, seed=seed)
    raise TypeError(f"unknown hyperparameter record {params!r}")


def model_to_json(model) -> str:
    return json.dumps({"variant": model.family, "state": model.to_dict()})


def model_from_json(text: str):
    d = json.loads(text)
    if d.get("variant") not in _MODELS:
        raise ValueError(f"unknown model variant {d.get('variant')!r}")
    return _MODELS[d["variant"]].from_dict(d["state"])


__all__ = [
    "ConvergenceWarning", "FAMILIES", "ForestModel", "KNNModel", "KNNParams", "OVAModel", "RFParams",
    "SVMModel", "SVMParams", "Standardization", "dual_objective", "knn_predict", "knn_train",
    "model_from_json", "model_to_json", "ova_multiclass_train", "ova_predict", "params_from_dict",
    "params_to_dict", "rbf_kernel", "rf_train", "solve_dual", "standardize_apply", "standardize_fit",
    "svm_decision", "svm_train", "train",
]
