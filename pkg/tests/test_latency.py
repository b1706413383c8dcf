"""Latency-distribution tests: bounds, moments, determinism, scaling."""

import random

import pytest

from amusim import BadParams, Bimodal, Constant, LogNormal, Scripted, Uniform, sample_latency
from amusim.latency import scale_latency


def test_constant_is_degenerate():
    rng = random.Random(0)
    assert all(sample_latency(Constant(300), rng) == 300 for _ in range(100))


def test_uniform_bounds_and_mean():
    # Far-memory band: 300 ns to 10 us; mean of the inclusive range is 5150.
    rng = random.Random(42)
    dist = Uniform(300, 10000)
    samples = [sample_latency(dist, rng) for _ in range(100_000)]
    assert min(samples) >= 300 and max(samples) <= 10000
    mean = sum(samples) / len(samples)
    assert abs(mean - 5150) / 5150 < 0.02


def test_bad_params():
    with pytest.raises(BadParams):
        Uniform(500, 400)
    with pytest.raises(BadParams):
        Uniform(-1, 400)
    with pytest.raises(BadParams):
        Constant(-5)
    with pytest.raises(BadParams):
        LogNormal(7.0, -0.1, 300, 10000)
    with pytest.raises(BadParams):
        LogNormal(7.0, 0.5, 500, 400)
    with pytest.raises(BadParams):
        Bimodal(1.5, Constant(1), Constant(2))


def test_bimodal_degenerate_probabilities():
    rng = random.Random(1)
    all_low = Bimodal(1.0, Constant(100), Constant(9000))
    all_high = Bimodal(0.0, Constant(100), Constant(9000))
    assert all(sample_latency(all_low, rng) == 100 for _ in range(50))
    assert all(sample_latency(all_high, rng) == 9000 for _ in range(50))


def test_bimodal_mixes_both_branches():
    rng = random.Random(2)
    dist = Bimodal(0.7, Uniform(100, 200), Uniform(5000, 9000))
    samples = [sample_latency(dist, rng) for _ in range(10_000)]
    low = sum(1 for s in samples if s <= 200)
    assert 0.65 < low / len(samples) < 0.75
    assert all(100 <= s <= 200 or 5000 <= s <= 9000 for s in samples)


def test_lognormal_respects_clamps():
    rng = random.Random(3)
    dist = LogNormal(8.0, 1.5, 300, 10000)
    samples = [sample_latency(dist, rng) for _ in range(20_000)]
    assert min(samples) >= 300 and max(samples) <= 10000
    assert min(samples) == 300 and max(samples) == 10000  # wide sigma hits both clamps


def test_sampling_is_deterministic_per_seed():
    dist = Bimodal(0.5, Uniform(300, 1000), LogNormal(8.5, 0.7, 300, 10000))
    rng1, rng2 = random.Random(9), random.Random(9)
    s1 = [sample_latency(dist, rng1) for _ in range(1000)]
    s2 = [sample_latency(dist, rng2) for _ in range(1000)]
    assert s1 == s2
    s3 = [sample_latency(dist, random.Random(10)) for _ in range(1000)]
    assert s1 != s3


def test_scripted_replays_and_exhausts():
    dist = Scripted((5, 7, 9))
    rng = random.Random(0)
    assert [sample_latency(dist, rng) for _ in range(3)] == [5, 7, 9]
    with pytest.raises(BadParams):
        sample_latency(dist, rng)


def test_scale_latency():
    assert scale_latency(Constant(100), 2.0) == Constant(200)
    assert scale_latency(Uniform(300, 10000), 0.5) == Uniform(150, 5000)
    scaled = scale_latency(Bimodal(0.5, Constant(10), Constant(100)), 3.0)
    assert scaled == Bimodal(0.5, Constant(30), Constant(300))
    ln = scale_latency(LogNormal(8.0, 1.0, 300, 10000), 2.0)
    assert ln.clamp_lo == 600 and ln.clamp_hi == 20000 and ln.sigma == 1.0
    with pytest.raises(BadParams):
        scale_latency(Constant(100), 0)
