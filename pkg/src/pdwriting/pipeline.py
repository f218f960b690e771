"""Recording -> feature vector -> feature table."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Iterable

import numpy as np

from .features import FeatureTable, FeatureVector
from .geometry import UnsupportedTaskError, geometric_features
from .ingest import Cohort, Recording, Task
from .kinematics import kinematic_features
from .nld import nld_features

FEATURE_SETS = ("kinem", "geom", "nld")
_EXTRACTORS = {"kinem": kinematic_features, "geom": geometric_features, "nld": nld_features}


class ExtractionError(ValueError):
    """A numeric extractor failed on one recording; ``__cause__`` holds the original."""

    def __init__(self, subject: str, task: str, cause: Exception):
        super().__init__(f"{subject}/{task}: {type(cause).__name__}: {cause}")
        self.subject = subject
        self.cause = cause


def canonical_sets(sets: Iterable[str]) -> tuple[str, ...]:
    want = {s.strip().lower() for s in sets if s.strip()}
    unknown = want - set(FEATURE_SETS)
    if unknown:
        raise ValueError(f"unknown feature set(s): {', '.join(sorted(unknown))}")
    if not want:
        raise ValueError("no feature set requested")
    return tuple(s for s in FEATURE_SETS if s in want)


def check_sets_for_task(sets: tuple[str, ...], task: Task) -> None:
    if "geom" in sets and task is not Task.SPIRAL:
        raise UnsupportedTaskError("geometric features are defined for the spiral task only")


def extract_features(rec: Recording, sets: Iterable[str] = FEATURE_SETS) -> FeatureVector:
    sets = canonical_sets(sets)
    check_sets_for_task(sets, rec.task)
    out = None
    for name in sets:
        v = _EXTRACTORS[name](rec)
        out = v if out is None else out.concat(v)
    return out


def _job(args):
    rec, sets = args
    return extract_features(rec, sets)


def extract_table(cohort: Cohort, task: Task | str, sets: Iterable[str] = FEATURE_SETS, jobs: int = 1) -> FeatureTable:
    """One row per recording of ``task``, in manifest subject order."""
    task = Task.parse(task)
    sets = canonical_sets(sets)
    check_sets_for_task(sets, task)
    pairs = list(cohort.iter_recordings(task))
    if not pairs:
        raise ValueError(f"no {task.value} recordings in the cohort")
    work = [(rec, sets) for _, rec in pairs]
    vectors = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_job, w) for w in work]
            for (s, _), fut in zip(pairs, futures):
                try:
                    vectors.append(fut.result())
                except UnsupportedTaskError:
                    raise
                except ValueError as exc:
                    raise ExtractionError(s.id, task.value, exc) from exc
    else:
        for (s, _), w in zip(pairs, work):
            try:
                vectors.append(_job(w))
            except UnsupportedTaskError:
                raise
            except ValueError as exc:
                raise ExtractionError(s.id, task.value, exc) from exc
    names = vectors[0].names
    return FeatureTable(
        ids=tuple(s.id for s, _ in pairs),
        groups=tuple(s.group.value for s, _ in pairs),
        updrs3=tuple(s.updrs3 for s, _ in pairs),
        tasks=(task.value,) * len(pairs),
        names=names,
        X=np.array([v.values for v in vectors]),
    )
