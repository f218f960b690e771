"""Tablet recordings and cohort manifests.

Recording files are comma-delimited text::

    #rate=180
    t,x,y,z,pressure,azimuth,altitude
    0.0,1.5,2.25,0.0,312.0,120.0,55.0
    ...

The ``#rate=`` pragma is optional (nominal 180 Hz). The first column may be
named ``index`` instead of ``t``, in which case timestamps are synthesised as
``index / rate``. Values are written with ``repr`` so a parse/serialise
round trip is bit-exact.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

NOMINAL_RATE = 180.0
CHANNELS = ("t", "x", "y", "z", "pressure", "azimuth", "altitude")
MANIFEST_HEADER = ("id", "group", "age", "sex", "updrs3", "years_post", "task", "path")


class IngestError(ValueError):
    """Malformed recording or manifest; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class Task(str, enum.Enum):
    SPIRAL = "spiral"
    SENTENCE = "sentence"

    @classmethod
    def parse(cls, value: "str | Task") -> "Task":
        if isinstance(value, Task):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise IngestError(f"unknown task {value!r}") from None


class Group(str, enum.Enum):
    PD = "PD"
    EHC = "eHC"
    YHC = "yHC"
    VALIDATION_PD = "ValidationPD"
    VALIDATION_HC = "ValidationHC"

    @classmethod
    def parse(cls, value: "str | Group") -> "Group":
        if isinstance(value, Group):
            return value
        for g in cls:
            if g.value.lower() == str(value).strip().lower():
                return g
        raise IngestError(f"unknown group {value!r}")

    @property
    def is_pd(self) -> bool:
        return self in (Group.PD, Group.VALIDATION_PD)

    @property
    def is_validation(self) -> bool:
        return self in (Group.VALIDATION_PD, Group.VALIDATION_HC)


@dataclass(frozen=True)
class TabletSample:
    t: float
    x: float
    y: float
    z: float
    pressure: float
    azimuth: float
    altitude: float

    @property
    def on_surface(self) -> bool:
        return self.z == 0.0


def _first_violation(arr: np.ndarray) -> tuple[int, str] | None:
    """Index and description of the first row breaking a sample invariant."""
    t, x, y, z, p, az, alt = arr.T
    checks = [
        (~np.isfinite(arr).all(axis=1), "non-finite value"),
        (t < 0, "negative timestamp"),
        (p < 0, "pressure < 0"),
        (z < 0, "z < 0"),
        ((z > 0) & (p != 0), "in-air sample (z > 0) carries pressure"),
        (~((az >= 0) & (az < 360)), "azimuth outside [0, 360)"),
        (~((alt >= 0) & (alt <= 90)), "altitude outside [0, 90]"),
    ]
    worst = None
    for mask, msg in checks:
        hit = np.flatnonzero(mask)
        if hit.size and (worst is None or hit[0] < worst[0]):
            worst = (int(hit[0]), msg)
    order = np.flatnonzero(np.diff(t) <= 0)
    if order.size and (worst is None or order[0] + 1 < worst[0]):
        worst = (int(order[0]) + 1, "timestamps not strictly increasing")
    return worst


class Recording:
    """Immutable ordered sample sequence for one task.

    Channels are held as a read-only ``(n, 7)`` float array in
    :data:`CHANNELS` order; ``samples`` materialises :class:`TabletSample`
    objects on demand.
    """

    __slots__ = ("_data", "task", "sample_rate")

    def __init__(self, data, task: "Task | str" = Task.SPIRAL, sample_rate: float = NOMINAL_RATE):
        arr = np.array(data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != len(CHANNELS):
            raise IngestError(f"expected (n, {len(CHANNELS)}) channel array, got {arr.shape}")
        if arr.shape[0] == 0:
            raise IngestError("no samples")
        if arr.shape[0] < 2:
            raise IngestError("recording needs at least 2 samples")
        if not sample_rate > 0:
            raise IngestError(f"sample rate must be positive, got {sample_rate!r}")
        bad = _first_violation(arr)
        if bad is not None:
            raise IngestError(bad[1], line=bad[0] + 1)
        arr.setflags(write=False)
        self._data = arr
        self.task = Task.parse(task)
        self.sample_rate = float(sample_rate)

    @classmethod
    def from_samples(cls, samples: Iterable[TabletSample], task="spiral", sample_rate=NOMINAL_RATE):
        rows = [[getattr(s, c) for c in CHANNELS] for s in samples]
        return cls(np.array(rows, dtype=np.float64).reshape(-1, len(CHANNELS)), task, sample_rate)

    @property
    def data(self) -> np.ndarray:
        return self._data

    def __len__(self) -> int:
        return self._data.shape[0]

    def channel(self, name: str) -> np.ndarray:
        return self._data[:, CHANNELS.index(name)]

    t = property(lambda self: self.channel("t"))
    x = property(lambda self: self.channel("x"))
    y = property(lambda self: self.channel("y"))
    z = property(lambda self: self.channel("z"))
    pressure = property(lambda self: self.channel("pressure"))
    azimuth = property(lambda self: self.channel("azimuth"))
    altitude = property(lambda self: self.channel("altitude"))

    @property
    def samples(self) -> list[TabletSample]:
        return [TabletSample(*map(float, row)) for row in self._data]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Recording):
            return NotImplemented
        return (
            self.task == other.task
            and self.sample_rate == other.sample_rate
            and np.array_equal(self._data, other._data)
        )

    def __repr__(self) -> str:
        return f"Recording(task={self.task.value}, n={len(self)}, rate={self.sample_rate})"


def parse_recording(content: bytes | str, task: "Task | str" = Task.SPIRAL, source: str | None = None) -> Recording:
    """Parse one recording file; every failure names its line."""
    text = content.decode("utf-8") if isinstance(content, (bytes, bytearray)) else content
    lines = text.splitlines()
    rate = NOMINAL_RATE
    i = 0
    while i < len(lines) and (not lines[i].strip() or lines[i].lstrip().startswith("#")):
        pragma = lines[i].strip().lstrip("#").strip()
        if pragma.lower().startswith("rate="):
            try:
                rate = float(pragma.split("=", 1)[1])
            except ValueError:
                raise IngestError(f"bad rate pragma {lines[i]!r}", line=i + 1, source=source) from None
            if not (math.isfinite(rate) and rate > 0):
                raise IngestError(f"sample rate must be positive, got {rate!r}", line=i + 1, source=source)
        i += 1
    if i >= len(lines):
        raise IngestError("missing header", source=source)
    header = tuple(h.strip() for h in lines[i].split(","))
    if header[1:] != CHANNELS[1:] or header[0] not in ("t", "index"):
        raise IngestError(f"malformed header {lines[i]!r}", line=i + 1, source=source)
    by_index = header[0] == "index"
    rows: list[list[float]] = []
    linenos: list[int] = []
    for lineno, line in enumerate(lines[i + 1 :], start=i + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(CHANNELS):
            raise IngestError(f"expected {len(CHANNELS)} fields, got {len(parts)}", line=lineno, source=source)
        try:
            row = [float(p) for p in parts]
        except ValueError:
            raise IngestError(f"non-numeric field in {line!r}", line=lineno, source=source) from None
        if by_index:
            idx = row[0]
            if idx != int(idx):
                raise IngestError(f"sample index {idx!r} is not an integer", line=lineno, source=source)
            row[0] = idx / rate
        rows.append(row)
        linenos.append(lineno)
    if not rows:
        raise IngestError("no samples", source=source)
    arr = np.array(rows, dtype=np.float64)
    bad = _first_violation(arr)
    if bad is not None:
        raise IngestError(bad[1], line=linenos[bad[0]], source=source)
    if len(rows) < 2:
        raise IngestError("recording needs at least 2 samples", line=linenos[0], source=source)
    return Recording(arr, task=task, sample_rate=rate)


def serialize_recording(rec: Recording) -> bytes:
    out = [f"#rate={rec.sample_rate!r}", ",".join(CHANNELS)]
    for row in rec.data:
        out.append(",".join(repr(float(v)) for v in row))
    return ("\n".join(out) + "\n").encode("utf-8")


def read_recording(path: str | Path, task="spiral") -> Recording:
    path = Path(path)
    return parse_recording(path.read_bytes(), task=task, source=str(path))


def write_recording(rec: Recording, path: str | Path) -> None:
    Path(path).write_bytes(serialize_recording(rec))


@dataclass(frozen=True)
class SubjectRecord:
    id: str
    group: Group
    age: float
    sex: str
    updrs3: int | None = None
    years_post_diagnosis: float | None = None

    def __post_init__(self):
        if self.group.is_pd and self.updrs3 is None:
            raise IngestError(f"PD subject {self.id!r} missing updrs3")
        if not self.group.is_pd and self.updrs3 is not None:
            raise IngestError(f"non-PD subject {self.id!r} has updrs3")
        if self.updrs3 is not None and not 0 <= self.updrs3 <= 132:
            raise IngestError(f"updrs3 {self.updrs3} outside 0..132 for {self.id!r}")

    @property
    def label(self) -> int:
        """Binary class: 1 for PD, 0 for healthy."""
        return int(self.group.is_pd)


@dataclass(frozen=True)
class Cohort:
    subjects: tuple[SubjectRecord, ...]
    recordings: Mapping[str, tuple[Recording, ...]] = field(default_factory=dict)

    def __post_init__(self):
        ids = [s.id for s in self.subjects]
        seen = set()
        for sid in ids:
            if sid in seen:
                raise IngestError(f"duplicate subject id {sid!r}")
            seen.add(sid)
        for sid in self.recordings:
            if sid not in seen:
                raise IngestError(f"recording for unknown subject {sid!r}")

    def subject(self, sid: str) -> SubjectRecord:
        for s in self.subjects:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def iter_recordings(self, task: "Task | str | None" = None):
        """Yield ``(subject, recording)`` in subject order."""
        want = Task.parse(task) if task is not None else None
        for s in self.subjects:
            for rec in self.recordings.get(s.id, ()):
                if want is None or rec.task == want:
                    yield s, rec

    def training_subjects(self) -> list[SubjectRecord]:
        return [s for s in self.subjects if not s.group.is_validation]

    def __len__(self) -> int:
        return len(self.subjects)


def _opt_float(text: str) -> float | None:
    text = text.strip()
    return float(text) if text else None


def parse_cohort_manifest(content: bytes | str, base_dir: str | Path = ".", load: bool = True) -> Cohort:
    """Parse a manifest and link the recordings it references.

    One row per ``(id, task)``; a subject may appear on several rows as long
    as its metadata agrees. Paths are resolved against ``base_dir``.
    """
    text = content.decode("utf-8") if isinstance(content, (bytes, bytearray)) else content
    base = Path(base_dir)
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(h.strip() for h in next(reader))
    except StopIteration:
        raise IngestError("empty manifest") from None
    if header != MANIFEST_HEADER:
        raise IngestError(f"manifest header must be {','.join(MANIFEST_HEADER)}", line=1)
    subjects: dict[str, SubjectRecord] = {}
    recordings: dict[str, list[Recording]] = {}
    keys = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(MANIFEST_HEADER):
            raise IngestError(f"expected {len(MANIFEST_HEADER)} fields", line=lineno)
        sid, group, age, sex, updrs3, years, task, rel = (c.strip() for c in row)
        try:
            updrs = _opt_float(updrs3)
            subj = SubjectRecord(
                id=sid,
                group=Group.parse(group),
                age=float(age),
                sex=sex,
                updrs3=None if updrs is None else int(updrs),
                years_post_diagnosis=_opt_float(years),
            )
            task_e = Task.parse(task)
        except IngestError as exc:
            raise IngestError(str(exc), line=lineno) from None
        except ValueError as exc:
            raise IngestError(f"bad field: {exc}", line=lineno) from None
        if (sid, task_e) in keys:
            raise IngestError(f"duplicate subject id {sid!r} for task {task_e.value}", line=lineno)
        keys.add((sid, task_e))
        if sid in subjects and subjects[sid] != subj:
            raise IngestError(f"conflicting metadata for subject {sid!r}", line=lineno)
        subjects.setdefault(sid, subj)
        path = base / rel
        if not path.is_file():
            raise IngestError(f"dangling recording path {rel!r}", line=lineno)
        if load:
            recordings.setdefault(sid, []).append(read_recording(path, task=task_e))
    return Cohort(tuple(subjects.values()), {k: tuple(v) for k, v in recordings.items()})


def read_cohort(manifest: str | Path) -> Cohort:
    manifest = Path(manifest)
    return parse_cohort_manifest(manifest.read_bytes(), base_dir=manifest.parent)


def manifest_rows(cohort: Cohort, paths: Mapping[tuple[str, Task], str]) -> list[Sequence[str]]:
    rows = [MANIFEST_HEADER]
    for s in cohort.subjects:
        for rec in cohort.recordings.get(s.id, ()):
            rows.append((
                s.id,
                s.group.value,
                repr(float(s.age)),
                s.sex,
                "" if s.updrs3 is None else str(s.updrs3),
                "" if s.years_post_diagnosis is None else repr(float(s.years_post_diagnosis)),
                rec.task.value,
                paths[(s.id, rec.task)],
            ))
    return rows
