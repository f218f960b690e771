import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import apen_loops, correlation_sum_loops, lz76_dictionary, rs_hurst, sampen_loops
from pdwriting.nld import (
    NLD_NAMES,
    EmbeddingParams,
    NldError,
    approximate_entropy,
    correlation_dimension,
    correlation_sum,
    delay_mutual_information,
    embed,
    embedding_dimension_fnn,
    gaussian_kernel_entropy,
    hurst_exponent,
    largest_lyapunov,
    lempel_ziv_complexity,
    lz76_phrase_count,
    nld_features,
    sample_entropy,
    sample_entropy_counts,
)
from pdwriting.synth import SpiralParams, generate_sentence, generate_spiral


def sine(n, period, phase=0.0):
    return np.sin(2 * np.pi * np.arange(n) / period + phase)


def noise(n, seed=0):
    return np.random.default_rng(seed).standard_normal(n)


def logistic(n, x0=0.3, burn=100):
    x = np.empty(n + burn)
    x[0] = x0
    for i in range(1, x.size):
        x[i] = 4.0 * x[i - 1] * (1.0 - x[i - 1])
    return x[burn:]


# -- embedding ---------------------------------------------------------------

def test_embed_small():
    pts = embed(np.arange(1, 11), EmbeddingParams(2, 3))
    assert pts.shape == (7, 2)
    assert pts[0].tolist() == [1, 4] and pts[-1].tolist() == [7, 10]


def test_embed_identity():
    x = noise(20)
    assert np.array_equal(embed(x, EmbeddingParams(1, 4))[:, 0], x)


def test_embed_index_audit_exhaustive():
    for n in range(2, 51):
        x = np.arange(n) * 1.5 + 0.25
        for m in range(1, 6):
            for tau in range(1, 6):
                p = EmbeddingParams(m, tau)
                if p.rows(n) < 2:
                    with pytest.raises(NldError):
                        embed(x, p)
                    continue
                pts = embed(x, p)
                assert pts.shape == (n - (m - 1) * tau, m)
                for k in range(pts.shape[0]):
                    for j in range(m):
                        assert pts[k, j] == x[k + j * tau]


def test_embedding_params_guard():
    with pytest.raises(ValueError):
        EmbeddingParams(0, 1)


# -- delay and dimension -----------------------------------------------------------

@pytest.mark.parametrize("period", [40, 60, 100])
def test_delay_quarter_period(period):
    tau = delay_mutual_information(sine(4000, period), max_lag=period)
    assert abs(tau - period / 4) <= 2


def test_delay_white_noise():
    assert delay_mutual_information(noise(4000), max_lag=50) == 1


def test_delay_constant():
    with pytest.raises(NldError):
        delay_mutual_information(np.ones(400), max_lag=20)


def test_fnn_sine():
    assert embedding_dimension_fnn(sine(2000, 50), tau=12) in (2, 3)


def test_fnn_noise_hits_cap():
    assert embedding_dimension_fnn(noise(2000), tau=1) == 10


def test_fnn_logistic():
    assert embedding_dimension_fnn(logistic(2000), tau=1) <= 3


def test_fnn_too_short():
    with pytest.raises(NldError):
        embedding_dimension_fnn(noise(15), tau=3)


# -- entropies -----------------------------------------------------------------------

def test_apen_constant_and_alternating():
    assert approximate_entropy(np.full(100, 2.0)) == 0.0
    alt = np.array([1.0, -1.0] * 100)
    assert approximate_entropy(alt) < 0.05
    assert approximate_entropy(alt) == pytest.approx(apen_loops(alt, 2, 0.2 * alt.std(ddof=1)), abs=1e-12)


def test_apen_noise_vs_sine():
    t = np.arange(1000) / 180
    assert approximate_entropy(noise(1000)) - approximate_entropy(np.sin(2 * np.pi * 2 * t)) >= 0.5


def test_apen_matches_loop_oracle():
    x = noise(120, seed=3).tolist()
    r = 0.2 * np.std(x, ddof=1)
    assert approximate_entropy(x) == pytest.approx(apen_loops(x, 2, r), abs=1e-12)
    assert approximate_entropy(x, m=3, r_tol=0.5) == pytest.approx(apen_loops(x, 3, 0.5), abs=1e-12)


def test_sampen_constant():
    assert sample_entropy(np.full(50, 1.0)) == 0.0


def test_sampen_periodic_vs_shuffle():
    x = sine(600, 30)
    sh = np.random.default_rng(1).permutation(x)
    assert sample_entropy(sh) > sample_entropy(x)


def test_sampen_tiny_case_frozen():
    x = [1, 2, 3] * 10
    # 28 templates, residues mod 3 of sizes 10, 9, 9 -> 45 + 36 + 36 pairs; all extend
    assert sampen_loops(x, 2, 0.5) == 0.0
    res = sample_entropy_counts(x, 2, 0.5)
    assert (res.matches_m, res.matches_m1) == (117, 117)
    assert res.value == 0.0


def test_sampen_matches_loop_oracle():
    x = noise(150, seed=8).tolist()
    r = 0.2 * np.std(x, ddof=1)
    assert sample_entropy(x) == pytest.approx(sampen_loops(x, 2, r), abs=1e-12)


def test_sampen_no_matches_is_flagged():
    res = sample_entropy_counts(np.arange(30.0), m=2, r_tol=0.1)
    assert res.undefined and math.isinf(float(res))


def test_entropy_too_short():
    with pytest.raises(NldError):
        approximate_entropy([1.0, 2.0, 3.0])
    with pytest.raises(NldError):
        sample_entropy([1.0, 2.0, 3.0])


@pytest.mark.parametrize("variant", ["approx", "sample"])
def test_gaussian_constant_and_wide_kernel(variant):
    assert gaussian_kernel_entropy(np.full(80, 3.0), variant=variant) == 0.0
    x = noise(300, seed=4)
    assert gaussian_kernel_entropy(x, R=100 * x.std(ddof=1), variant=variant) == pytest.approx(0.0, abs=1e-4)


def test_gaussian_kernel_by_definition():
    x = noise(60, seed=2)
    R = 0.2 * x.std(ddof=1)

    def sims(m, count):
        out = np.empty((count, count))
        for i in range(count):
            for j in range(count):
                d = max(abs(x[i + k] - x[j + k]) for k in range(m))
                out[i, j] = math.exp(-d * d / (10 * R * R))
        return out

    n = x.size
    phi = lambda m: np.mean(np.log(sims(m, n - m + 1).mean(axis=1)))  # noqa: E731
    assert gaussian_kernel_entropy(x, variant="approx") == pytest.approx(phi(2) - phi(3), abs=1e-12)
    count = n - 2
    b, a = sims(2, count), sims(3, count)
    B = (b.sum() - np.trace(b)) / 2
    A = (a.sum() - np.trace(a)) / 2
    assert gaussian_kernel_entropy(x, variant="sample") == pytest.approx(-math.log(A / B), abs=1e-12)


def _all_entropies(x):
    return [
        approximate_entropy(x),
        sample_entropy(x),
        gaussian_kernel_entropy(x, variant="approx"),
        gaussian_kernel_entropy(x, variant="sample"),
    ]


def test_entropy_ordering_noise_over_sine():
    x_noise, x_sine = noise(1000, seed=5), sine(1000, 90)
    for a, b in zip(_all_entropies(x_noise), _all_entropies(x_sine)):
        assert a > b


@given(st.floats(-20, 20).filter(lambda a: abs(a) > 0.05), st.floats(-100, 100), st.integers(0, 30))
def test_entropy_affine_invariance(a, b, seed):
    x = noise(120, seed)
    base = _all_entropies(x)
    moved = _all_entropies(a * x + b)
    for u, v in zip(base, moved):
        assert v == pytest.approx(u, abs=1e-9)


@given(st.integers(0, 10_000))
def test_entropy_non_negative(seed):
    x = np.cumsum(noise(100, seed))
    assert approximate_entropy(x) >= 0
    assert sample_entropy(x) >= 0


# -- correlation dimension ----------------------------------------------------------

def test_correlation_sum_matches_loop_oracle():
    x = sine(260, 37) + 0.1 * noise(260, seed=6)
    p = EmbeddingParams(2, 9)
    cs = correlation_sum(x, p)
    pts = embed(x, p).tolist()
    for k in (0, 7, 13, 19):
        assert cs.c[k] == pytest.approx(correlation_sum_loops(pts, cs.eps[k], 10), abs=1e-12)


def test_cd_circle():
    period = 100
    assert correlation_dimension(sine(3000, period), EmbeddingParams(2, period // 4)) == pytest.approx(1.0, abs=0.2)


def test_cd_uniform_noise():
    x = np.random.default_rng(7).uniform(size=3000)
    assert correlation_dimension(x, EmbeddingParams(2, 1)) == pytest.approx(2.0, abs=0.3)


def test_cd_degenerate():
    with pytest.raises(NldError):
        correlation_dimension(np.ones(500), EmbeddingParams(2, 1))
    with pytest.raises(NldError):
        correlation_dimension(noise(50), EmbeddingParams(2, 1))


@given(st.integers(0, 1000), st.integers(1, 3))
def test_cd_at_most_m(seed, m):
    x = np.random.default_rng(seed).uniform(size=600)
    assert correlation_dimension(x, EmbeddingParams(m, 1)) <= m


# -- Hurst -----------------------------------------------------------------------------

def test_hurst_white_noise():
    assert hurst_exponent(noise(4096, seed=9)) == pytest.approx(0.5, abs=0.1)


def test_hurst_ramp():
    assert hurst_exponent(np.arange(1000.0)) > 0.9


def test_hurst_constant():
    with pytest.raises(NldError):
        hurst_exponent(np.ones(200))


def test_hurst_matches_loop_oracle():
    x = noise(512, seed=10)
    sizes = np.unique(np.floor(np.logspace(np.log10(8), np.log10(256), 16)).astype(int))
    assert hurst_exponent(x) == pytest.approx(rs_hurst(x.tolist(), sizes.tolist()), abs=1e-10)


# -- Lyapunov ----------------------------------------------------------------------------

def test_lle_logistic():
    x = logistic(2000)
    ref = np.mean(np.log(np.abs(4.0 - 8.0 * x)))  # derivative-sum oracle
    assert ref == pytest.approx(math.log(2), abs=0.05)
    assert largest_lyapunov(x, EmbeddingParams(2, 1)) == pytest.approx(math.log(2), abs=0.1)


def test_lle_sine():
    assert largest_lyapunov(sine(2000, 50), EmbeddingParams(2, 12)) == pytest.approx(0.0, abs=0.05)


def test_lle_noise():
    assert largest_lyapunov(noise(2000, seed=11), EmbeddingParams(2, 1)) > 1.0


def test_lle_ordering():
    p = EmbeddingParams(2, 1)
    a = largest_lyapunov(sine(2000, 50), p)
    b = largest_lyapunov(logistic(2000), p)
    c = largest_lyapunov(noise(2000, seed=12), p)
    assert a < b < c


def test_lle_rate_scaling():
    x = logistic(1000)
    p = EmbeddingParams(2, 1)
    assert largest_lyapunov(x, p, rate=180.0) == pytest.approx(180.0 * largest_lyapunov(x, p))


def test_lle_too_few_points():
    with pytest.raises(NldError):
        largest_lyapunov(noise(150), EmbeddingParams(2, 1))


# -- Lempel-Ziv ----------------------------------------------------------------------------

def test_lz76_classic_example():
    assert lz76_phrase_count([int(c) for c in "0001101001000101"]) == 6


@given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
def test_lz76_matches_dictionary_oracle(bits):
    assert lz76_phrase_count(bits) == lz76_dictionary(bits)


def test_lzc_ramp():
    assert lempel_ziv_complexity(np.arange(1001.0)) < 0.2


def test_lzc_random_walk():
    steps = np.random.default_rng(13).choice([-1.0, 1.0], size=4097)
    assert lempel_ziv_complexity(np.cumsum(steps)) == pytest.approx(1.0, abs=0.15)


def test_lzc_decreasing_equals_increasing():
    assert lempel_ziv_complexity(-np.arange(500.0)) == lempel_ziv_complexity(np.arange(500.0))


def test_lzc_too_short():
    with pytest.raises(NldError):
        lempel_ziv_complexity(np.arange(10.0))


@given(st.integers(0, 10_000), st.integers(16, 400))
def test_lzc_in_unit_interval(seed, n):
    v = lempel_ziv_complexity(noise(n, seed))
    assert 0.0 <= v <= 1.0


# -- feature vector -------------------------------------------------------------------------

def test_features_vector_and_metadata():
    fv = nld_features(generate_spiral(SpiralParams(seed=2)))
    assert fv.names == NLD_NAMES and len(fv) == 8
    assert fv.meta["m"] >= 2 and fv.meta["tau"] >= 1
    assert np.all(np.isfinite(fv.values))
    assert 0.0 <= fv["lzc"] <= 1.0 and fv["sampen"] >= 0 and fv["apen"] >= 0


def test_features_deterministic():
    rec = generate_spiral(SpiralParams(seed=4, tremor_amp=0.2))
    assert np.array_equal(nld_features(rec).values, nld_features(rec).values)


def test_sentence_has_features():
    assert len(nld_features(generate_sentence(SpiralParams(seed=1)))) == 8


def test_sampen_rises_with_tremor():
    for seed in range(4):
        ideal = nld_features(generate_spiral(SpiralParams(seed=seed)))
        shaky = nld_features(generate_spiral(SpiralParams(seed=seed, tremor_amp=0.2)))
        assert shaky["sampen"] > ideal["sampen"]


def test_lzc_rises_with_tremor_noise_free():
    ideal = nld_features(generate_spiral(SpiralParams(noise_std=0.0)))
    for amp in (0.2, 0.3, 0.5):
        shaky = nld_features(generate_spiral(SpiralParams(noise_std=0.0, tremor_amp=amp)))
        assert shaky["lzc"] > ideal["lzc"]
        assert shaky["sampen"] > ideal["sampen"]
