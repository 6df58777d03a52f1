"""Cable channel model, PRBS7 source, and feed-forward equalization.

FFE taps are solved by least squares on the combined impulse response
and applied to real-valued samples before quantization, so the
pre-distortion is baked into the stored pattern at no extra cost in
the datapath.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, SingularSystem, ZeroSeed
from .dacmodel import AnalogTrace

MAX_FFE_TAPS = 32

# PRBS7 polynomial x^7 + x^6 + 1, Fibonacci form
_PRBS7_MASK = 0x7F


@dataclass(frozen=True)
class ChannelModel:
    """Discrete-time FIR channel, tap 0 = main cursor, one tap per UI."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        if taps.size < 1:
            raise InvalidConfig("channel needs at least one tap")
        if taps[0] == 0.0:
            raise InvalidConfig("main cursor tap must be nonzero")
        object.__setattr__(self, "taps", taps)

    @property
    def dc_gain(self) -> float:
        return float(self.taps.sum())


@dataclass(frozen=True)
class FfeTaps:
    taps: np.ndarray
    main_tap_index: int

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        if not (0 <= self.main_tap_index < taps.size):
            raise InvalidConfig("main_tap_index outside tap vector")
        object.__setattr__(self, "taps", taps)


def prbs7(seed: int, n: int) -> np.ndarray:
    """n bits of the maximal-length x^7 + x^6 + 1 sequence (period 127).

    The MSB of the 7-bit state is emitted each step; feedback is the
    XOR of state bits 6 and 5 shifted into the LSB.
    """
    if seed == 0:
        raise ZeroSeed("LFSR seed must be nonzero")
    if not (0 < seed <= _PRBS7_MASK):
        raise ZeroSeed("seed must be a 7-bit nonzero value")
    if n < 0:
        raise ValueError("bit count must be >= 0")

    period = np.empty(127, dtype=np.uint8)
    state = seed
    for i in range(127):
        period[i] = (state >> 6) & 1
        fb = ((state >> 6) ^ (state >> 5)) & 1
        state = ((state << 1) | fb) & _PRBS7_MASK
    reps = -(-n // 127) if n else 0
    return np.tile(period, max(reps, 1))[:n]


def apply_channel(samples, ch: ChannelModel) -> np.ndarray:
    """Linear convolution with the channel taps, truncated to input length."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 1:
        raise ValueError("empty input")
    return np.convolve(samples, ch.taps)[: samples.size]


def apply_channel_to_trace(trace: AnalogTrace, ch: ChannelModel, samples_per_ui: int) -> AnalogTrace:
    """Apply the UI-spaced channel to an oversampled trace.

    Taps are zero-stuffed to one UI spacing on the trace grid, i.e.
    y(t) = sum_k h_k * x(t - k*UI).
    """
    stuffed = np.zeros((ch.taps.size - 1) * samples_per_ui + 1)
    stuffed[::samples_per_ui] = ch.taps
    out = np.convolve(trace.samples, stuffed)[: trace.samples.size]
    return AnalogTrace(samples=out, sample_period=trace.sample_period)


def solve_ffe(ch: ChannelModel, n_taps: int, main_tap_index: int) -> FfeTaps:
    """Least-squares FFE taps against the channel.

    Minimizes || conv(w, h) - delta[main_tap_index] ||^2, then rescales
    the taps to unit DC gain so the equalized chain preserves the
    channel's DC gain (full-scale pulses do not silently shrink).
    """
    if not (1 <= n_taps <= MAX_FFE_TAPS):
        raise InvalidConfig(f"n_taps must be in [1, {MAX_FFE_TAPS}]")
    if not (0 <= main_tap_index < n_taps):
        raise InvalidConfig("main_tap_index must be in [0, n_taps)")

    h = ch.taps
    m = h.size + n_taps - 1
    conv = np.zeros((m, n_taps))
    for j in range(n_taps):
        conv[j : j + h.size, j] = h
    target = np.zeros(m)
    target[main_tap_index] = 1.0

    taps, _, rank, _ = np.linalg.lstsq(conv, target, rcond=1e-12)
    if rank < n_taps:
        raise SingularSystem("normal equations are rank deficient")
    if ch.dc_gain != 0.0:
        s = taps.sum()
        if abs(s) < 1e-12:
            raise SingularSystem("solved taps have no DC gain to normalize")
        taps = taps / s
    return FfeTaps(taps=taps, main_tap_index=main_tap_index)


def apply_ffe(samples, ffe: FfeTaps):
    """Pre-distort samples with the FFE taps, main tap at zero delay.

    Boundary samples are edge-replicated so a DC input stays exactly DC.
    Output is clipped to [-1, 1]; returns (samples, clip_count).
    """
    x = np.asarray(samples, dtype=float)
    w = ffe.taps
    n = w.size
    if n == 1:
        y = x * w[0]
    else:
        xe = np.concatenate([np.full(n - 1, x[0]), x, np.full(n - 1, x[-1])])
        y = np.convolve(xe, w)[(n - 1) + ffe.main_tap_index :][: x.size]
    clipped = np.clip(y, -1.0, 1.0)
    clip_count = int(np.count_nonzero(clipped != y))
    return clipped, clip_count


def residual_isi(ch: ChannelModel, ffe: FfeTaps | None = None) -> float:
    """Sum of |off-cursor| taps of the (equalized) response over the main cursor."""
    resp = ch.taps if ffe is None else np.convolve(ffe.taps, ch.taps)
    main = np.argmax(np.abs(resp))
    rest = np.abs(resp).sum() - abs(resp[main])
    return float(rest / abs(resp[main]))


def reference_channel() -> ChannelModel:
    """Stand-in cryostat cable response used for acceptance checks.

    Two-tap FIR [1, 0.35] cascaded with a one-pole low-pass at 0.45x the
    full rate, truncated to 10 taps (coefficients beyond are < 1e-9).
    """
    a = np.exp(-2.0 * np.pi * 0.45)
    pole = (1.0 - a) * a ** np.arange(10)
    return ChannelModel(taps=np.convolve([1.0, 0.35], pole))
