"""Clock divider chain and edge-time generation."""

import numpy as np
import pytest

from rfawg import clocktree
from rfawg.clocktree import ClockConfig
from rfawg.errors import InvalidConfig, InvalidDivisor


def test_ideal_edges_exact():
    cfg = ClockConfig(sample_rate=20e9)
    ed = clocktree.derive_edges(64, cfg)
    assert np.array_equal(ed.edge_times, np.arange(64) / 20e9)
    assert ed.nominal_period == 1 / 20e9


def test_duty_cycle_period_alternation():
    cfg = ClockConfig(sample_rate=10e9, duty_cycle_error=0.05)
    ed = clocktree.derive_edges(4, cfg)
    periods = np.diff(ed.edge_times)
    t = 1 / 10e9
    assert periods == pytest.approx([t * 0.9, t * 1.1, t * 0.9], rel=1e-12)


def test_rj_sigma_statistics():
    cfg = ClockConfig(sample_rate=20e9, rj_sigma=0.2e-12, rng_seed=3)
    ed = clocktree.derive_edges(100_000, cfg)
    tie = ed.edge_times - np.arange(100_000) * ed.nominal_period
    assert tie.std() == pytest.approx(0.2e-12, rel=0.05)


def test_determinism_for_fixed_seed():
    cfg = ClockConfig(sample_rate=20e9, rj_sigma=1e-12, rng_seed=99)
    a = clocktree.derive_edges(1000, cfg)
    b = clocktree.derive_edges(1000, cfg)
    assert np.array_equal(a.edge_times, b.edge_times)
    other = ClockConfig(sample_rate=20e9, rj_sigma=1e-12, rng_seed=100)
    assert not np.array_equal(a.edge_times, clocktree.derive_edges(1000, other).edge_times)


def test_deterministic_jitter_zero_mean_over_any_four_edges():
    cfg = ClockConfig(sample_rate=10e9, duty_cycle_error=0.08, quadrature_error=0.11)
    ed = clocktree.derive_edges(64, cfg)
    dj = ed.edge_times - np.arange(64) / cfg.sample_rate
    # zero up to double rounding of the two displacement terms
    for start in range(60):
        assert dj[start : start + 4].sum() == pytest.approx(0.0, abs=1e-24 * cfg.period / 1e-10)


def test_combined_displacement_bound():
    cfg = ClockConfig(sample_rate=10e9, duty_cycle_error=0.3, quadrature_error=0.25)
    with pytest.raises(InvalidConfig):
        clocktree.derive_edges(16, cfg)


def test_config_field_bounds():
    with pytest.raises(InvalidConfig):
        ClockConfig(sample_rate=0.0)
    with pytest.raises(InvalidConfig):
        ClockConfig(sample_rate=1e9, duty_cycle_error=0.5)
    with pytest.raises(InvalidConfig):
        ClockConfig(sample_rate=1e9, rj_sigma=-1e-12)


def test_subrate_indices():
    assert np.array_equal(clocktree.subrate_indices(2, 8), np.arange(8))
    assert np.array_equal(clocktree.subrate_indices(32, 64), [0, 16, 32, 48])
    assert np.array_equal(clocktree.subrate_indices(8, 12), [0, 4, 8])


def test_invalid_divisor():
    with pytest.raises(InvalidDivisor):
        clocktree.subrate_indices(3, 8)
