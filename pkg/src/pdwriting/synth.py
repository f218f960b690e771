"""Synthetic spiral / sentence recordings and labelled cohorts.

Spirals are drawn around a centre offset from the tablet origin, so the
radial trajectory ``r(t) = |(x, y)|`` oscillates once per turn with an
amplitude that grows with the spiral radius. Impairment is a sinusoidal
radial tremor; sensor jitter is additive Gaussian noise on x and y.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .ingest import (
    Cohort,
    Group,
    Recording,
    SubjectRecord,
    Task,
    manifest_rows,
    write_recording,
)
from .rng import Stream

STAGE_UPDRS = ((None, None), (3, 20), (21, 40), (41, 70))


@dataclass(frozen=True)
class SpiralParams:
    turns: float = 5.0
    duration: float = 8.0
    rate: float = 180.0
    growth: float = 0.1
    tremor_amp: float = 0.0
    tremor_freq: float = 5.0
    noise_std: float = 0.04
    pressure_base: float = 500.0
    pressure_wobble: float = 40.0
    seed: int = 0
    center: tuple[float, float] = (0.0, 10.0)

    def __post_init__(self):
        if self.turns < 2:
            raise ValueError("turns must be >= 2")
        if not self.rate > 0 or not self.duration > 0:
            raise ValueError("rate and duration must be positive")
        if self.tremor_amp < 0 or self.noise_std < 0:
            raise ValueError("tremor_amp and noise_std must be non-negative")

    def replace(self, **kw) -> "SpiralParams":
        return dataclasses.replace(self, **kw)


def _pen_channels(t: np.ndarray, p: SpiralParams, stream: Stream):
    pressure = p.pressure_base + p.pressure_wobble * np.sin(2 * np.pi * 0.5 * t)
    pressure = np.maximum(pressure, 0.0)
    azimuth = np.mod(45.0 + 2.0 * np.sin(2 * np.pi * 0.3 * t), 360.0)
    altitude = np.clip(60.0 + 1.5 * np.cos(2 * np.pi * 0.2 * t), 0.0, 90.0)
    return pressure, azimuth, altitude


def _assemble(t, x, y, pressure, azimuth, altitude, task, rate) -> Recording:
    z = np.zeros_like(t)
    return Recording(np.column_stack([t, x, y, z, pressure, azimuth, altitude]), task=task, sample_rate=rate)


def generate_spiral(p: SpiralParams) -> Recording:
    n = int(round(p.duration * p.rate))
    t = np.arange(n) / p.rate
    theta = 2 * np.pi * p.turns * t / p.duration
    stream = Stream(p.seed, "spiral")
    radius = p.growth * theta + p.tremor_amp * np.sin(2 * np.pi * p.tremor_freq * t)
    noise = stream.child("noise").normal(2 * n) * p.noise_std
    x = p.center[0] + radius * np.cos(theta) + noise[:n]
    y = p.center[1] + radius * np.sin(theta) + noise[n:]
    return _assemble(t, x, y, *_pen_channels(t, p, stream), Task.SPIRAL, p.rate)


def generate_sentence(p: SpiralParams) -> Recording:
    """Loop-like strokes: two incommensurate sines per axis plus drift.

    Reuses the spiral parameter block; ``growth`` scales the loop size and
    ``turns`` sets the number of loops over ``duration``.
    """
    n = int(round(p.duration * p.rate))
    t = np.arange(n) / p.rate
    f1 = p.turns / p.duration
    f2 = f1 * np.sqrt(2.0)
    size = 30.0 * p.growth
    tremor = p.tremor_amp * np.sin(2 * np.pi * p.tremor_freq * t)
    stream = Stream(p.seed, "sentence")
    noise = stream.child("noise").normal(2 * n) * p.noise_std
    x = p.center[0] + 4.0 * size * t / p.duration + size * (np.sin(2 * np.pi * f1 * t) + 0.4 * np.sin(2 * np.pi * f2 * t)) + tremor + noise[:n]
    y = p.center[1] + size * (np.cos(2 * np.pi * f1 * t) + 0.4 * np.cos(2 * np.pi * f2 * t + 0.7)) + tremor + noise[n:]
    return _assemble(t, x, y, *_pen_channels(t, p, stream), Task.SENTENCE, p.rate)


def stage_from_updrs(updrs3: int | None) -> int:
    """0 = healthy, then stages split at MDS-UPDRS-III 20 and 40."""
    if updrs3 is None:
        return 0
    if updrs3 <= 20:
        return 1
    if updrs3 <= 40:
        return 2
    return 3


def _subject_params(base: SpiralParams, seed: int, variability: float) -> SpiralParams:
    s = Stream(seed, "subject")
    g, d, a, pb, pw = s.normal(5)
    tf = s.uniform(1)[0]
    return base.replace(
        seed=seed,
        growth=base.growth * float(np.exp(variability * 0.5 * g)),
        duration=base.duration * float(np.exp(variability * 0.5 * d)),
        tremor_amp=max(0.0, base.tremor_amp * (1.0 + variability * float(a))),
        tremor_freq=base.tremor_freq * (0.8 + 0.4 * float(tf)),
        pressure_base=base.pressure_base * float(np.exp(variability * pb)),
        pressure_wobble=base.pressure_wobble * float(np.exp(variability * pw)),
    )


def _make_subject(sid, group, stage, seed, base, tasks, variability):
    s = Stream(seed, "demographics")
    u_age, u_sex, u_up = s.uniform(3)
    updrs = None
    if group.is_pd:
        lo, hi = STAGE_UPDRS[stage] if stage else (5, 60)
        updrs = int(lo + np.floor(u_up * (hi - lo + 1)))
    subj = SubjectRecord(
        id=sid,
        group=group,
        age=float(round(50 + 30 * u_age)),
        sex="F" if u_sex < 0.5 else "M",
        updrs3=updrs,
        years_post_diagnosis=float(round(1 + 10 * u_up, 1)) if group.is_pd else None,
    )
    p = _subject_params(base, seed, variability)
    recs = []
    for task in tasks:
        task = Task.parse(task)
        recs.append(generate_spiral(p) if task is Task.SPIRAL else generate_sentence(p))
    return subj, tuple(recs)


def generate_cohort(
    n_per_class: int,
    healthy: SpiralParams,
    impaired: SpiralParams,
    seed: int = 0,
    tasks: Sequence[str] = ("spiral",),
    healthy_group: Group = Group.YHC,
    validation: bool = False,
    id_prefix: str = "S",
    variability: float = 0.15,
) -> Cohort:
    """Balanced two-class cohort; subject ``i`` draws everything from ``seed + i``."""
    if n_per_class < 3:
        raise ValueError("n_per_class must be >= 3")
    hc_group = Group.VALIDATION_HC if validation else healthy_group
    pd_group = Group.VALIDATION_PD if validation else Group.PD
    subjects, recordings = [], {}
    for i in range(2 * n_per_class):
        is_pd = i >= n_per_class
        sid = f"{id_prefix}{i:03d}"
        subj, recs = _make_subject(
            sid, pd_group if is_pd else hc_group, 0, seed + i,
            impaired if is_pd else healthy, tasks, variability,
        )
        subjects.append(subj)
        recordings[sid] = recs
    return Cohort(tuple(subjects), recordings)


def generate_staging_cohort(
    n_per_class: int,
    base: SpiralParams,
    ladder: Sequence[float] = (0.0, 0.1, 0.25, 0.5),
    seed: int = 0,
    tasks: Sequence[str] = ("spiral",),
    id_prefix: str = "G",
    variability: float = 0.15,
) -> Cohort:
    """Four-class cohort: rung ``k`` of the tremor ladder is stage ``k``.

    Stage 0 subjects are healthy; stages 1-3 are PD with MDS-UPDRS-III drawn
    inside the range that :func:`stage_from_updrs` maps back to ``k``.
    """
    if n_per_class < 3:
        raise ValueError("n_per_class must be >= 3")
    if len(ladder) != 4:
        raise ValueError("the staging ladder has four rungs")
    subjects, recordings = [], {}
    for k, amp in enumerate(ladder):
        for j in range(n_per_class):
            i = k * n_per_class + j
            sid = f"{id_prefix}{i:03d}"
            group = Group.YHC if k == 0 else Group.PD
            subj, recs = _make_subject(sid, group, k, seed + i, base.replace(tremor_amp=amp), tasks, variability)
            subjects.append(subj)
            recordings[sid] = recs
    return Cohort(tuple(subjects), recordings)


def write_cohort(cohort: Cohort, out_dir: str | Path, manifest_name: str = "manifest.csv") -> Path:
    """Write every recording plus a manifest; returns the manifest path."""
    import csv

    out = Path(out_dir)
    (out / "recordings").mkdir(parents=True, exist_ok=True)
    paths = {}
    for s, rec in cohort.iter_recordings():
        rel = f"recordings/{s.id}_{rec.task.value}.csv"
        write_recording(rec, out / rel)
        paths[(s.id, rec.task)] = rel
    manifest = out / manifest_name
    with manifest.open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(manifest_rows(cohort, paths))
    return manifest
