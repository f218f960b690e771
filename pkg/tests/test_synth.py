import numpy as np
import pytest
from scipy.stats import binomtest

from pdwriting.geometry import geometric_features
from pdwriting.ingest import Group, Task, parse_recording, serialize_recording
from pdwriting.kinematics import kinematic_features, radial_trajectory
from pdwriting.nld import sample_entropy
from pdwriting.synth import (
    STAGE_UPDRS,
    SpiralParams,
    generate_cohort,
    generate_sentence,
    generate_spiral,
    generate_staging_cohort,
    stage_from_updrs,
)


def test_params_guard():
    with pytest.raises(ValueError):
        SpiralParams(turns=1.5)
    with pytest.raises(ValueError):
        SpiralParams(tremor_amp=-0.1)
    with pytest.raises(ValueError):
        SpiralParams(rate=0)


def test_ideal_radius_monotone_about_centre():
    p = SpiralParams(tremor_amp=0.0, noise_std=0.0, center=(0.0, 0.0))
    rec = generate_spiral(p)
    r = radial_trajectory(rec).values
    quarter = int(len(r) / (4 * p.turns))
    assert np.all(np.diff(r[quarter:]) > 0)


def test_spiral_follows_the_formula():
    p = SpiralParams(noise_std=0.0, tremor_amp=0.2, seed=3)
    rec = generate_spiral(p)
    t = rec.t
    theta = 2 * np.pi * p.turns * t / p.duration
    rho = p.growth * theta + p.tremor_amp * np.sin(2 * np.pi * p.tremor_freq * t)
    assert np.allclose(rec.x, p.center[0] + rho * np.cos(theta))
    assert np.allclose(rec.y, p.center[1] + rho * np.sin(theta))
    assert np.allclose(rec.pressure, p.pressure_base + p.pressure_wobble * np.sin(np.pi * t))
    assert np.all(rec.z == 0)
    assert len(rec) == int(round(p.duration * p.rate))


def test_determinism():
    p = SpiralParams(seed=9, tremor_amp=0.3)
    assert generate_spiral(p).data.tobytes() == generate_spiral(p).data.tobytes()
    assert generate_sentence(p).data.tobytes() == generate_sentence(p).data.tobytes()
    assert generate_spiral(p).data.tobytes() != generate_spiral(p.replace(seed=10)).data.tobytes()


def test_recordings_round_trip():
    for seed in range(10):
        for rec in (generate_spiral(SpiralParams(seed=seed)), generate_sentence(SpiralParams(seed=seed))):
            assert parse_recording(serialize_recording(rec), task=rec.task) == rec


def test_sentence_task():
    assert generate_sentence(SpiralParams()).task is Task.SENTENCE


def test_mse_ordering_twenty_pairs():
    wins = 0
    for seed in range(20):
        a = geometric_features(generate_spiral(SpiralParams(seed=seed)))["mse"]
        b = geometric_features(generate_spiral(SpiralParams(seed=seed, tremor_amp=0.3)))["mse"]
        wins += b > a
    assert wins == 20


def test_cohort_shape():
    c = generate_cohort(20, SpiralParams(duration=2), SpiralParams(duration=2, tremor_amp=0.3))
    assert len(c) == 40
    assert len(list(c.iter_recordings())) == 40
    groups = [s.group for s in c.subjects]
    assert groups.count(Group.PD) == 20 and groups.count(Group.YHC) == 20
    assert all(s.updrs3 is not None for s in c.subjects if s.group is Group.PD)


def test_cohort_seed_derivation():
    a = generate_cohort(3, SpiralParams(duration=2), SpiralParams(duration=2, tremor_amp=0.3), seed=100)
    b = generate_cohort(3, SpiralParams(duration=2), SpiralParams(duration=2, tremor_amp=0.3), seed=101)
    # subject i of the seed-100 cohort draws from seed 100 + i, so cohort b is a itself shifted by one
    assert a.recordings["S001"][0] == b.recordings["S000"][0]


def test_disjoint_validation_cohort():
    dev = generate_cohort(3, SpiralParams(duration=2), SpiralParams(duration=2, tremor_amp=0.3), seed=0)
    val = generate_cohort(3, SpiralParams(duration=2), SpiralParams(duration=2, tremor_amp=0.3), seed=1000,
                          validation=True, id_prefix="V")
    assert not {s.id for s in dev.subjects} & {s.id for s in val.subjects}
    assert {s.group for s in val.subjects} == {Group.VALIDATION_HC, Group.VALIDATION_PD}


def test_staging_ladder():
    c = generate_staging_cohort(4, SpiralParams(duration=2))
    stages = [stage_from_updrs(s.updrs3) for s in c.subjects]
    assert stages == [k for k in range(4) for _ in range(4)]


def test_stage_thresholds():
    assert stage_from_updrs(None) == 0
    assert [stage_from_updrs(u) for u in (3, 20, 21, 40, 41, 70)] == [1, 1, 2, 2, 3, 3]
    for k, (lo, hi) in enumerate(STAGE_UPDRS[1:], start=1):
        assert stage_from_updrs(lo) == stage_from_updrs(hi) == k


def test_small_cohort_rejected():
    with pytest.raises(ValueError):
        generate_cohort(2, SpiralParams(), SpiralParams())


def _sign_test(lower, higher):
    wins = sum(h > l for l, h in zip(lower, higher))
    return wins, binomtest(wins, len(lower), 0.5, alternative="greater").pvalue


def test_speed_std_increases_with_tremor():
    amps = (0.0, 0.1, 0.2, 0.3)
    vals = {a: [kinematic_features(generate_spiral(SpiralParams(seed=s, tremor_amp=a)))["speed_std"]
                for s in range(20)] for a in amps}
    for lo, hi in zip(amps[:-1], amps[1:]):
        _, p = _sign_test(vals[lo], vals[hi])
        assert p < 0.05


def test_sampen_increases_with_tremor():
    amps = (0.0, 0.2, 0.4)
    vals = {a: [sample_entropy(radial_trajectory(generate_spiral(SpiralParams(seed=s, tremor_amp=a))).values)
                for s in range(20)] for a in amps}
    for lo, hi in zip(amps[:-1], amps[1:]):
        _, p = _sign_test(vals[lo], vals[hi])
        assert p < 0.05
