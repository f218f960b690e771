"""Atomic JSON/CSV writers for reports, ROC points and score histograms."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write(path: str | Path, data: bytes | str) -> Path:
    """Write to a sibling temp file, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, default=_default, allow_nan=True) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, to_json(obj))


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def roc_csv(roc) -> str:
    return csv_text(("fpr", "tpr", "threshold"), [(f, t, repr(float(h))) for f, t, h in roc.points()])


def scores_csv(ids, labels, scores) -> str:
    return csv_text(("id", "label", "score"), [(i, int(l), repr(float(s))) for i, l, s in zip(ids, labels, scores)])


def score_histogram(scores, labels, bins: int = 20) -> tuple[np.ndarray, dict]:
    """Shared bin edges and per-class counts of decision scores."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    edges = np.histogram_bin_edges(s, bins=bins)
    return edges, {int(c): np.histogram(s[y == c], bins=edges)[0] for c in np.unique(y)}


def histogram_csv(scores, labels, bins: int = 20) -> str:
    edges, counts = score_histogram(scores, labels, bins)
    classes = sorted(counts)
    rows = [(repr(float(edges[k])), repr(float(edges[k + 1])), *(int(counts[c][k]) for c in classes))
            for k in range(edges.size - 1)]
    return csv_text(("lo", "hi", *(f"count_{c}" for c in classes)), rows)
