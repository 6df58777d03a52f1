"""Pulse compiler: pulse programs -> quantized full-rate codes -> memory image.

A program is an ordered list of segments, each an envelope shape times a
carrier. When the program carries a tone list, every non-gap segment's
envelope modulates the tone sum instead of the segment carrier (FDMA
composition for multi-qubit drive). Carrier phase is referenced to the
segment start, so programs are relocatable in memory.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import patgen
from .equalizer import FfeTaps, apply_ffe
from .errors import AliasedCarrier, InvalidProgram, ProgramTooLong
from .patgen import SramImage

ENVELOPES = ("gaussian", "raised_cosine", "square", "flat_gap")
GAUSSIAN_TRUNCATION_SIGMAS = 3.0
MAX_SAMPLES = patgen.CAPACITY


@dataclass(frozen=True)
class PulseSegment:
    envelope: str
    duration: float  # seconds
    amplitude: float = 1.0
    carrier_frequency: float = 0.0  # Hz
    phase: float = 0.0  # radians
    sigma: float | None = None  # seconds, gaussian only

    def __post_init__(self):
        if self.envelope not in ENVELOPES:
            raise InvalidProgram(f"unknown envelope {self.envelope!r}")
        if self.duration <= 0:
            raise InvalidProgram("segment duration must be positive")
        if abs(self.amplitude) > 1.0:
            raise InvalidProgram("|amplitude| must be <= 1")
        if self.envelope == "gaussian" and (self.sigma is None or self.sigma <= 0):
            raise InvalidProgram("gaussian segments need a positive sigma")


@dataclass(frozen=True)
class Tone:
    amplitude: float
    frequency: float  # Hz
    phase: float = 0.0  # radians


@dataclass(frozen=True)
class PulseProgram:
    segments: tuple
    sample_rate: float  # Hz, required; no default baud rate is assumed
    tones: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "tones", tuple(self.tones))
        if not self.segments:
            raise InvalidProgram("program has no segments")
        if self.sample_rate <= 0:
            raise InvalidProgram("sample_rate must be positive")
        if self.tones and sum(abs(t.amplitude) for t in self.tones) > 1.0 + 1e-12:
            raise InvalidProgram("tone amplitudes must sum to <= 1 (no clipping by construction)")


def _segment_samples(duration: float, sample_rate: float) -> int:
    # half-up rounding, fixed so compiled lengths are cross-platform stable
    return int(math.floor(duration * sample_rate + 0.5))


def _envelope(seg: PulseSegment, t: np.ndarray) -> np.ndarray:
    if seg.envelope == "square":
        return np.ones_like(t)
    if seg.envelope == "flat_gap":
        return np.zeros_like(t)
    center = seg.duration / 2.0
    if seg.envelope == "raised_cosine":
        # full-width raised cosine flank (Hann shape), peak 1 at center
        return np.sin(np.pi * t / seg.duration) ** 2
    # gaussian, peak 1 at center, truncated at +-3 sigma or the boundary
    window = min(GAUSSIAN_TRUNCATION_SIGMAS * seg.sigma, center)
    env = np.exp(-0.5 * ((t - center) / seg.sigma) ** 2)
    env[np.abs(t - center) > window] = 0.0
    return env


def synth(program: PulseProgram) -> np.ndarray:
    """Real-valued full-rate samples in [-1, 1] for the whole program.

    Each sample is evaluated at its hold-interval midpoint (k + 1/2)/rate
    from the segment start, so symmetric envelopes sample symmetrically
    and time-reversal invariance survives quantization.
    """
    nyquist = program.sample_rate / 2.0
    for tone in program.tones:
        if tone.frequency >= nyquist:
            raise AliasedCarrier(f"tone at {tone.frequency} Hz >= Nyquist {nyquist} Hz")

    pieces = []
    total = 0
    for seg in program.segments:
        n = _segment_samples(seg.duration, program.sample_rate)
        if n < 1:
            raise InvalidProgram(f"segment of {seg.duration} s is shorter than one sample")
        total += n
        if total > MAX_SAMPLES:
            raise ProgramTooLong(f"program needs {total}+ samples, memory holds {MAX_SAMPLES}")
        t = (np.arange(n) + 0.5) / program.sample_rate
        if seg.envelope == "flat_gap":
            pieces.append(np.zeros(n))
            continue
        if seg.carrier_frequency >= nyquist:
            raise AliasedCarrier(
                f"carrier at {seg.carrier_frequency} Hz >= Nyquist {nyquist} Hz"
            )
        env = _envelope(seg, t)
        if program.tones:
            carrier = sum(
                tone.amplitude * np.cos(2 * np.pi * tone.frequency * t + tone.phase)
                for tone in program.tones
            )
        else:
            carrier = np.cos(2 * np.pi * seg.carrier_frequency * t + seg.phase)
        pieces.append(seg.amplitude * env * carrier)
    return np.concatenate(pieces)


def quantize(samples) -> np.ndarray:
    """Map [-1, 1] samples to 8-bit codes, midscale 128.

    code = clamp(round_half_away_from_zero(127.5 + 127.5*s), 0, 255);
    out-of-range inputs clamp rather than error.
    """
    s = np.asarray(samples, dtype=float)
    if not np.all(np.isfinite(s)):
        raise InvalidProgram("samples must be finite")
    x = 127.5 + 127.5 * s
    rounded = np.copysign(np.floor(np.abs(x) + 0.5), x)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def dequantize(codes) -> np.ndarray:
    """Inverse code mapping back to [-1, 1]."""
    return (np.asarray(codes, dtype=float) - 127.5) / 127.5


def compile(program: PulseProgram, ffe: FfeTaps | None = None) -> SramImage:
    """synth -> optional FFE pre-distortion -> quantize -> packed image."""
    samples = synth(program)
    if ffe is not None:
        samples, _ = apply_ffe(samples, ffe)
    return patgen.pack_image(quantize(samples))
