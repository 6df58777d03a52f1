"""Segmented 8-bit DAC: weight structure, static levels, output rendering.

The output stage is modeled behaviorally: a zero-order hold switching on
the supplied edge times, followed by a single-pole response whose 10-90%
rise time is the configured value (time constant = rise_time / 2.2).
Codes are offset binary with midscale 128.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidConfig, NonMonotonicEdges
from .patgen import NOMINAL_WEIGHTS, _weight_enables

FULL_SCALE_CODES = 255
MIN_OVERSAMPLE = 8


@dataclass(frozen=True)
class DacConfig:
    """Full-scale swing plus per-segment relative weight errors.

    weight_mismatch entries follow the segment order T2, T1, T0, B5..B0.
    """

    full_scale_voltage: float = 1.0
    weight_mismatch: np.ndarray = field(default_factory=lambda: np.zeros(9))
    output_rise_time: float = 0.0

    def __post_init__(self):
        mm = np.asarray(self.weight_mismatch, dtype=float)
        if mm.shape != (9,):
            raise InvalidConfig("weight_mismatch must have 9 entries")
        if np.any(np.abs(mm) >= 0.5):
            raise InvalidConfig("segment mismatch magnitudes must be < 0.5")
        if self.full_scale_voltage <= 0:
            raise InvalidConfig("full_scale_voltage must be positive")
        if self.output_rise_time < 0:
            raise InvalidConfig("output_rise_time must be >= 0")
        object.__setattr__(self, "weight_mismatch", mm)

    @property
    def actual_weights(self) -> np.ndarray:
        return NOMINAL_WEIGHTS * (1.0 + self.weight_mismatch)


@dataclass(frozen=True)
class AnalogTrace:
    """Uniformly sampled output voltage record."""

    samples: np.ndarray
    sample_period: float

    def __post_init__(self):
        if self.sample_period <= 0:
            raise InvalidConfig("sample_period must be positive")
        if not np.all(np.isfinite(self.samples)):
            raise InvalidConfig("trace contains non-finite values")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size * self.sample_period


def thermometer_encode(code):
    """Weight-enable bits for a code (or array of codes).

    The top two bits select t = code // 64 of the three thermometer
    weights; the low six bits drive the binary weights directly. The
    enabled nominal weights always sum to the code itself.
    """
    codes = np.atleast_1d(np.asarray(code))
    if codes.min() < 0 or codes.max() > 255:
        raise InvalidConfig("codes must be in [0, 255]")
    bits = _weight_enables(codes.astype(np.uint8))
    return bits[0] if np.isscalar(code) or np.asarray(code).ndim == 0 else bits


def level_of(code, cfg: DacConfig):
    """Static output voltage for a code (or array of codes)."""
    bits = np.atleast_2d(thermometer_encode(code))
    levels = bits @ cfg.actual_weights * (cfg.full_scale_voltage / FULL_SCALE_CODES)
    return float(levels[0]) if np.asarray(code).ndim == 0 else levels


def build_level_table(cfg: DacConfig) -> np.ndarray:
    """All 256 static levels, index = code."""
    return level_of(np.arange(256), cfg)


def render(codes, edges, cfg: DacConfig, oversample: int = MIN_OVERSAMPLE) -> AnalogTrace:
    """Render codes switching at the given edge times onto a uniform grid.

    The grid starts at the first edge with step T/oversample, T being the
    mean edge spacing, and spans one nominal period past the last edge so
    the final code is held for its full interval. With zero rise time the
    output is a pure zero-order hold; otherwise each step settles with a
    single-pole response (initial state = first level, i.e. pre-settled).
    """
    codes = np.asarray(codes, dtype=np.uint8)
    edges = np.asarray(edges, dtype=float)
    if codes.size != edges.size:
        raise InvalidConfig(f"{codes.size} codes but {edges.size} edges")
    if codes.size < 2:
        raise InvalidConfig("need at least two samples to render")
    if oversample < MIN_OVERSAMPLE:
        raise InvalidConfig(f"oversample must be >= {MIN_OVERSAMPLE}")
    if np.any(np.diff(edges) <= 0):
        raise NonMonotonicEdges("edge times must be strictly increasing")

    n = codes.size
    nominal_period = (edges[-1] - edges[0]) / (n - 1)
    dt = nominal_period / oversample
    # work in time relative to the first edge, so shifting every edge
    # shifts the trace without re-deciding anything
    rel = edges - edges[0]
    t = dt * np.arange(n * oversample + 1)
    levels = build_level_table(cfg)[codes]

    # each grid cell takes the exact time average of the held levels, so
    # edge displacements far below the grid step still move the output
    # (pointwise sampling would quantize them away)
    cum_at_edge = np.concatenate([[0.0], np.cumsum(levels[:-1] * np.diff(rel))])
    j = np.maximum(np.searchsorted(rel, t, side="right") - 1, 0)
    cum = cum_at_edge[j] + (t - rel[j]) * levels[j]
    x = np.diff(cum) / dt

    if cfg.output_rise_time > 0:
        tau = cfg.output_rise_time / 2.2
        a = np.exp(-dt / tau)
        # exact step response of the pole sampled on the grid
        y, _ = lfilter([1.0 - a], [1.0, -a], x, zi=[a * x[0]])
    else:
        y = x
    return AnalogTrace(samples=y, sample_period=dt)
