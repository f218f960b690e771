"""Frozen-hyperparameter evaluation on a disjoint validation cohort."""

from __future__ import annotations

import numpy as np

from ..classify import train
from . import audit
from .dataset import Dataset
from .loocv import EvalReport, binary_report


class IdOverlapError(ValueError):
    pass


def _subject(row_id: str) -> str:
    return row_id.split("/", 1)[0]


def check_disjoint(dev: Dataset, val: Dataset) -> None:
    shared = sorted({_subject(i) for i in dev.ids} & {_subject(i) for i in val.ids})
    if shared:
        more = f" (+{len(shared) - 3} more)" if len(shared) > 3 else ""
        raise IdOverlapError(f"development and validation cohorts share ids: {', '.join(shared[:3])}{more}")


def frozen_validation(trained_or_params, dev: Dataset | None, val: Dataset, seed: int = 0,
                      standardize: bool = True) -> EvalReport:
    """Train once on ``dev`` with fixed hyperparameters (or take a trained
    model as is) and score ``val``. No search of any kind happens here."""
    if dev is not None:
        check_disjoint(dev, val)
        if list(dev.names) != list(val.names):
            raise ValueError("development and validation feature columns differ")
    if hasattr(trained_or_params, "decision"):
        model = trained_or_params
        params = getattr(trained_or_params, "params", None)
    else:
        if dev is None:
            raise ValueError("hyperparameters given without a development cohort")
        params = trained_or_params
        audit.record("fit", len(dev))
        model = train(params, dev.X, dev.y, seed=seed, standardize=standardize)
    scores = model.decision(val.X)
    preds = model.predict(val.X)
    return binary_report(model.family, params, scores, preds, val.y, val.ids,
                         notes={"frozen": True, "train_size": None if dev is None else len(dev)})
