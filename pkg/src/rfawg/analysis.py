"""Metrology suite: spectral metrics, static linearity, jitter, eye, power.

Spectral analysis is strictly coherent: records are rectangular-windowed
and every declared tone must sit exactly on an FFT bin, which removes
leakage ambiguity and makes the metrics bit-reproducible. dBFS is
referenced to a full-scale sine, i.e. one of amplitude full_scale/2.
"""

from dataclasses import dataclass

import numpy as np

from .dacmodel import AnalogTrace
from .errors import (
    AnalysisError,
    DegenerateTable,
    InsufficientSamples,
    InvalidConfig,
    NonCoherentTone,
    OutOfBandProduct,
    OutOfModelRange,
)

COHERENCE_TOL_BINS = 1e-6

# dual-Dirac total-jitter multiplier for BER 1e-12
DUAL_DIRAC_Q = 14.069

MIN_JITTER_CROSSINGS = 10_000
MIN_EYE_SPAN_UI = 100

# power model calibration: affine in f*V^2 through the published endpoints,
# with a 20/80 digital/analog split pinned at the 14 GHz / 0.8 V breakdown
POWER_F_RANGE = (2e9, 34e9)
POWER_V_RANGE = (0.6, 1.0)
POWER_ENDPOINTS_MW = (40.0, 140.0)
DIGITAL_SHARE = 0.20
QUBITS_PER_DAC = 20

_POWER_K = (POWER_ENDPOINTS_MW[1] - POWER_ENDPOINTS_MW[0]) / (
    POWER_F_RANGE[1] * POWER_V_RANGE[1] ** 2 - POWER_F_RANGE[0] * POWER_V_RANGE[0] ** 2
)
_POWER_LEAK = POWER_ENDPOINTS_MW[0] - _POWER_K * POWER_F_RANGE[0] * POWER_V_RANGE[0] ** 2


@dataclass(frozen=True)
class Spectrum:
    """Single-sided coherent magnitude spectrum."""

    frequencies: np.ndarray  # Hz, bin centers
    amplitudes: np.ndarray  # volts peak per bin
    dbfs: np.ndarray
    record_length: int
    full_scale: float

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def bin_of(self, frequency: float) -> int:
        """Bin index of an on-grid frequency; NonCoherentTone if off-grid."""
        b = frequency / self.bin_width
        if abs(b - round(b)) > COHERENCE_TOL_BINS:
            raise NonCoherentTone(f"{frequency} Hz is {b - round(b):.3g} bins off-grid")
        b = int(round(b))
        if not (0 <= b < self.frequencies.size):
            raise OutOfBandProduct(f"{frequency} Hz outside the single-sided band")
        return b


@dataclass(frozen=True)
class LinearityReport:
    inl: np.ndarray  # 256 values, LSB
    dnl: np.ndarray  # 255 values, LSB

    @property
    def max_inl(self) -> float:
        return float(np.max(np.abs(self.inl)))

    @property
    def max_dnl(self) -> float:
        return float(np.max(np.abs(self.dnl)))


@dataclass(frozen=True)
class JitterReport:
    total: float  # seconds pk-pk at BER 1e-12
    random_sigma: float  # seconds
    deterministic: float  # seconds pk-pk


@dataclass(frozen=True)
class EyeDiagram:
    counts: np.ndarray  # (voltage_bins, time_bins)
    time_edges: np.ndarray  # seconds, spanning 2 UI
    voltage_edges: np.ndarray
    unit_interval: float


@dataclass(frozen=True)
class PowerReport:
    total: float  # mW
    analog: float
    digital: float
    per_qubit: float


def spectrum(trace: AnalogTrace, record: int, tones=None, full_scale: float = 2.0) -> Spectrum:
    """Magnitude spectrum of the first `record` trace samples.

    Rectangular window, single-sided, amplitudes in volts peak and in
    dBFS (0 dBFS = sine of amplitude full_scale/2). `record` must be a
    power of two no longer than the trace. Declared tone frequencies
    are checked for coherence (> 1e-6 bin off-grid raises).
    """
    if record < 2 or record & (record - 1):
        raise ValueError(f"record length {record} is not a power of two")
    if record > len(trace):
        raise ValueError(f"record {record} exceeds trace length {len(trace)}")

    x = trace.samples[:record]
    fft = np.fft.rfft(x)
    amplitudes = np.abs(fft) * (2.0 / record)
    amplitudes[0] /= 2.0
    amplitudes[-1] /= 2.0  # record is even, last bin is Nyquist
    frequencies = np.fft.rfftfreq(record, d=trace.sample_period)

    ref = full_scale / 2.0
    with np.errstate(divide="ignore"):
        dbfs = 20.0 * np.log10(amplitudes / ref)

    spec = Spectrum(
        frequencies=frequencies,
        amplitudes=amplitudes,
        dbfs=dbfs,
        record_length=record,
        full_scale=full_scale,
    )
    for f in tones or ():
        spec.bin_of(f)
    return spec


def sfdr(spec: Spectrum, signal_bins) -> float:
    """Largest signal magnitude minus largest spur magnitude, in dB.

    Every non-signal, non-DC bin is a spur candidate.
    """
    signal_bins = set(int(b) for b in signal_bins)
    if not signal_bins:
        raise ValueError("signal_bins must be non-empty")
    mask = np.ones(spec.dbfs.size, dtype=bool)
    mask[0] = False
    mask[list(signal_bins)] = False
    signal = max(spec.dbfs[b] for b in signal_bins)
    return float(signal - np.max(spec.dbfs[mask]))


def im3(spec: Spectrum, f1: float, f2: float) -> float:
    """Third-order intermodulation relative to the tones, in dBc.

    Uses the larger of the products at 2*f1 - f2 and 2*f2 - f1; both
    must fall inside the single-sided band.
    """
    if not f1 < f2:
        raise ValueError("need f1 < f2")
    b1, b2 = spec.bin_of(f1), spec.bin_of(f2)
    products = (2 * b1 - b2, 2 * b2 - b1)
    for p in products:
        if not (0 < p < spec.frequencies.size):
            raise OutOfBandProduct(f"IM3 product bin {p} out of band")
    tone = max(spec.dbfs[b1], spec.dbfs[b2])
    spur = max(spec.dbfs[p] for p in products)
    return float(spur - tone)


def thd(spec: Spectrum, f0: float, n_harmonics: int = 5) -> float:
    """Total harmonic distortion in percent of the fundamental amplitude.

    Harmonics 2..n_harmonics+1 are summed; those beyond Nyquist fold
    back by aliasing the bin index. A folded harmonic landing on DC or
    the fundamental cannot be separated and raises OutOfBandProduct.
    """
    if n_harmonics < 1:
        raise ValueError("need at least one harmonic")
    b0 = spec.bin_of(f0)
    if b0 == 0:
        raise OutOfBandProduct("fundamental at DC")
    n = spec.record_length
    power = 0.0
    for h in range(2, n_harmonics + 2):
        b = (h * b0) % n
        if b > n // 2:
            b = n - b
        if b == 0 or b == b0:
            raise OutOfBandProduct(f"harmonic {h} folds onto bin {b}")
        power += spec.amplitudes[b] ** 2
    return float(np.sqrt(power) / spec.amplitudes[b0] * 100.0)


def sndr(spec: Spectrum, signal_bins) -> float:
    """Signal power over everything else except DC, in dB."""
    signal_bins = set(int(b) for b in signal_bins)
    p = spec.amplitudes**2 / 2.0
    p[0] = spec.amplitudes[0] ** 2
    p[-1] = spec.amplitudes[-1] ** 2
    p_signal = sum(p[b] for b in signal_bins)
    p_rest = p[1:].sum() - sum(p[b] for b in signal_bins if b != 0)
    return float(10.0 * np.log10(p_signal / p_rest))


def inl_dnl(levels) -> LinearityReport:
    """Endpoint-fit INL and DNL from a 256-entry level table.

    The fit line passes through (0, level[0]) and (255, level[255]);
    one LSB is the fit-line step.
    """
    levels = np.asarray(levels, dtype=float)
    if levels.shape != (256,):
        raise InvalidConfig("level table must have 256 entries")
    if levels[255] == levels[0]:
        raise DegenerateTable("level table endpoints coincide")
    lsb = (levels[255] - levels[0]) / 255.0
    fit = levels[0] + lsb * np.arange(256)
    inl = (levels - fit) / lsb
    # telescoping form of (step/lsb - 1); exactly zero for an exactly
    # linear table, where the direct quotient would leave rounding dust
    dnl = np.diff(inl)
    return LinearityReport(inl=inl, dnl=dnl)


def jitter_decompose(crossing_times, nominal_period: float) -> JitterReport:
    """Dual-Dirac decomposition of clock-like crossing times.

    Expects one crossing per nominal period. TIE is measured against
    the ideal grid k*nominal_period; deterministic jitter is the
    peak-to-peak spread of the per-phase (mod-4) mean TIE, random
    jitter the standard deviation of the residual, and total jitter
    DJ + 14.069*RJ (BER 1e-12).
    """
    t = np.asarray(crossing_times, dtype=float)
    if t.size < MIN_JITTER_CROSSINGS:
        raise InsufficientSamples(f"need >= {MIN_JITTER_CROSSINGS} crossings, got {t.size}")
    k = np.arange(t.size)
    tie = t - k * nominal_period
    phase_mean = np.array([tie[p::4].mean() for p in range(4)])
    dj = float(phase_mean.max() - phase_mean.min())
    residual = tie - phase_mean[k % 4]
    rj = float(residual.std(ddof=1))
    return JitterReport(total=dj + DUAL_DIRAC_Q * rj, random_sigma=rj, deterministic=dj)


def find_crossings(trace: AnalogTrace, threshold: float) -> np.ndarray:
    """Times where the trace crosses the threshold, by linear interpolation.

    Times are relative to the first trace sample. Rising and falling
    crossings are both returned, in order.
    """
    v = trace.samples - threshold
    sign = np.where(v >= 0, 1, -1)
    idx = np.nonzero(np.diff(sign))[0]
    frac = v[idx] / (v[idx] - v[idx + 1])
    return (idx + frac) * trace.sample_period


def edge_tie(crossing_times, unit_interval: float) -> np.ndarray:
    """Zero-mean TIE of data edges against the recovered UI grid.

    Suitable for pattern waveforms that do not cross on every UI; each
    crossing is compared with its nearest grid point, anchored on the
    first crossing's phase. Deviations must stay well inside half a UI.
    """
    t = np.asarray(crossing_times, dtype=float)
    if t.size < 2:
        raise InsufficientSamples("need at least two crossings")
    phase = (t - t[0] + unit_interval / 2.0) % unit_interval - unit_interval / 2.0
    return phase - phase.mean()


def eye_diagram(trace: AnalogTrace, unit_interval: float, bins=(128, 64)) -> EyeDiagram:
    """Fold the trace modulo 2 UI into a (voltage, time) histogram."""
    if trace.duration < MIN_EYE_SPAN_UI * unit_interval:
        raise InsufficientSamples(
            f"trace spans {trace.duration / unit_interval:.1f} UI, need >= {MIN_EYE_SPAN_UI}"
        )
    time_bins, voltage_bins = bins
    t = (np.arange(len(trace)) * trace.sample_period) % (2.0 * unit_interval)
    counts, t_edges, v_edges = np.histogram2d(
        t, trace.samples, bins=[time_bins, voltage_bins],
        range=[[0.0, 2.0 * unit_interval], [trace.samples.min(), trace.samples.max()]],
    )
    return EyeDiagram(
        counts=counts.T, time_edges=t_edges, voltage_edges=v_edges, unit_interval=unit_interval
    )


def eye_opening(trace: AnalogTrace, unit_interval: float, threshold: float, phase: float = 0.5) -> float:
    """Vertical eye opening at the given sampling phase inside each UI."""
    instants = np.arange(phase * unit_interval, trace.duration, unit_interval)
    idx = np.round(instants / trace.sample_period).astype(int)
    idx = idx[idx < len(trace)]
    v = trace.samples[idx]
    high, low = v[v > threshold], v[v <= threshold]
    if high.size == 0 or low.size == 0:
        raise InsufficientSamples("no eye: a rail is missing at the sampling instants")
    return float(high.min() - low.max())


def measure_ramp_levels(trace: AnalogTrace, codes, oversample: int) -> np.ndarray:
    """Static level per code from a rendered staircase ramp.

    Averages the settled second half of each constant-code block; the
    code sequence must visit all 256 codes.
    """
    codes = np.asarray(codes)
    if set(np.unique(codes)) != set(range(256)):
        raise AnalysisError("ramp must cover all 256 codes")
    levels = np.zeros(256)
    boundaries = np.flatnonzero(np.diff(codes)) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [codes.size]])
    for s, e in zip(starts, ends):
        lo = s * oversample + (e - s) * oversample // 2
        hi = e * oversample
        levels[codes[s]] = trace.samples[lo:hi].mean()
    return levels


def power_model(sample_rate: float, supply: float) -> PowerReport:
    """Total, analog, digital, and per-qubit power at an operating point.

    total = leak + k * sample_rate * supply^2, calibrated to 40 mW at
    the (2 GHz, 0.6 V) corner and 140 mW at (34 GHz, 1.0 V); digital
    blocks carry a 20% share (the 14 GHz / 0.8 V breakdown), and the
    per-qubit figure assumes 1:20 frequency multiplexing. Inside the
    8-20 GHz / 0.8 V operating sub-range this lands in 2-4 mW/qubit.
    """
    if not POWER_F_RANGE[0] <= sample_rate <= POWER_F_RANGE[1]:
        raise OutOfModelRange(f"sample_rate {sample_rate} outside {POWER_F_RANGE}")
    if not POWER_V_RANGE[0] <= supply <= POWER_V_RANGE[1]:
        raise OutOfModelRange(f"supply {supply} outside {POWER_V_RANGE}")
    total = _POWER_LEAK + _POWER_K * sample_rate * supply**2
    digital = DIGITAL_SHARE * total
    return PowerReport(
        total=total,
        analog=total - digital,
        digital=digital,
        per_qubit=total / QUBITS_PER_DAC,
    )
