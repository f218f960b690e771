"""Counts of grid searches and model fits, for proving what a workflow ran."""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field

_ACTIVE: list["CallAudit"] = []


@dataclass
class CallAudit:
    grid_searches: int = 0
    fits: int = 0
    fit_sizes: list = field(default_factory=list)


def record(kind: str, size: int = 0) -> None:
    for a in _ACTIVE:
        if kind == "grid_search":
            a.grid_searches += 1
        elif kind == "fit":
            a.fits += 1
            a.fit_sizes.append(size)


@contextlib.contextmanager
def call_audit():
    audit = CallAudit()
    _ACTIVE.append(audit)
    try:
        yield audit
    finally:
        _ACTIVE.remove(audit)
