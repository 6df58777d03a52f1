"""Pulse compiler: synthesis, quantization, memory image generation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfawg import patgen, wavec
from rfawg.equalizer import FfeTaps
from rfawg.errors import AliasedCarrier, InvalidProgram, ProgramTooLong
from rfawg.wavec import PulseProgram, PulseSegment, Tone


def single_segment(fs=16e9, **kw):
    return PulseProgram(segments=(PulseSegment(**kw),), sample_rate=fs)


def test_flat_gap_is_all_zeros():
    s = wavec.synth(single_segment(envelope="flat_gap", duration=10e-9))
    assert s.size == 160
    assert not s.any()


def test_two_tone_raised_cosine_peak_bounded():
    prog = PulseProgram(
        segments=(PulseSegment(envelope="raised_cosine", duration=200e-9),),
        sample_rate=20.48e9,
        tones=(Tone(0.45, 5.1e9), Tone(0.45, 5.3e9)),
    )
    s = wavec.synth(prog)
    assert s.size == 4096
    assert np.abs(s).max() <= 0.9


def test_gaussian_envelope_peaks_at_center():
    # 65 samples puts a sample exactly on the segment center
    prog = single_segment(
        fs=16.25e9, envelope="gaussian", duration=4e-9, sigma=0.6e-9, carrier_frequency=0.0
    )
    s = wavec.synth(prog)
    assert s.size == 65
    assert s.max() == pytest.approx(1.0)
    assert s.argmax() == 32


def test_gaussian_truncated_at_three_sigma():
    prog = single_segment(
        fs=16e9, envelope="gaussian", duration=16e-9, sigma=1e-9, carrier_frequency=0.0
    )
    s = wavec.synth(prog)
    t = (np.arange(s.size) + 0.5) / 16e9
    outside = np.abs(t - 8e-9) > 3e-9
    assert not s[outside].any()
    assert s[~outside].all()


def test_quantize_examples():
    assert list(wavec.quantize([0.0, 1.0, -1.0, 0.5])) == [128, 255, 0, 191]


def test_quantize_clamps_out_of_range():
    assert list(wavec.quantize([1.5, -2.0])) == [255, 0]


@given(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False))
def test_quantization_error_bound(s):
    code = wavec.quantize([s])[0]
    assert abs(wavec.dequantize([code])[0] - s) <= 1 / 255 + 1e-12


@given(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False))
@settings(max_examples=25, deadline=None)
def test_amplitude_linearity(a):
    seg = dict(envelope="gaussian", duration=8e-9, sigma=1e-9, carrier_frequency=2e9)
    unit = wavec.synth(single_segment(amplitude=1.0, **seg))
    scaled = wavec.synth(single_segment(amplitude=a, **seg))
    assert np.allclose(scaled, a * unit, atol=1e-15)


@pytest.mark.parametrize("env", ["gaussian", "raised_cosine"])
def test_time_reversal_symmetry(env):
    fs = 16e9
    d = 64 / fs
    seg = PulseSegment(
        envelope=env, duration=d, amplitude=0.9, carrier_frequency=8 / d,
        phase=0.0, sigma=d / 8,
    )
    codes = wavec.quantize(wavec.synth(PulseProgram(segments=(seg,), sample_rate=fs)))
    assert np.abs(codes.astype(int) - codes[::-1].astype(int)).max() <= 1


def test_compiled_length_is_rounded_sum_padded():
    prog = PulseProgram(
        segments=(
            PulseSegment(envelope="square", duration=10.4e-9, carrier_frequency=1e9),
            PulseSegment(envelope="flat_gap", duration=3.3e-9),
        ),
        sample_rate=10e9,
    )
    s = wavec.synth(prog)
    assert s.size == round(10.4e-9 * 10e9) + round(3.3e-9 * 10e9)
    img = wavec.compile(prog)
    assert img.sample_count == -(-s.size // 32) * 32


def test_compile_flat_gap_is_midscale_image():
    img = wavec.compile(single_segment(fs=3.2e9, envelope="flat_gap", duration=10e-9))
    assert np.all(patgen.unpack_image(img) == 128)


def test_compile_identity_ffe_matches_plain():
    prog = single_segment(
        fs=16e9, envelope="gaussian", duration=8e-9, sigma=1e-9, carrier_frequency=3e9
    )
    plain = wavec.compile(prog)
    ffe = wavec.compile(prog, ffe=FfeTaps(taps=np.array([1.0]), main_tap_index=0))
    assert np.array_equal(plain.banks, ffe.banks)
    assert plain.sample_count == ffe.sample_count


def test_compile_gaussian_burst_matches_direct_synthesis_oracle():
    # varying amplitude and spacing, all pulses under 5 ns
    fs = 16e9
    bursts = [(0.9, 4e-9, 0.5e-9), (0.5, 3e-9, 0.4e-9), (0.7, 4.5e-9, 0.6e-9)]
    gaps = [2e-9, 1.5e-9, 2.5e-9]
    segs = []
    for (amp, d, sig), gap in zip(bursts, gaps):
        segs.append(PulseSegment(envelope="gaussian", duration=d, amplitude=amp,
                                 carrier_frequency=6e9, sigma=sig))
        segs.append(PulseSegment(envelope="flat_gap", duration=gap))
    img = wavec.compile(PulseProgram(segments=tuple(segs), sample_rate=fs))
    got = patgen.unpack_image(img)

    # straight-line synthesis without going through the compiler pipeline
    expected = []
    for (amp, d, sig), gap in zip(bursts, gaps):
        n = int(np.floor(d * fs + 0.5))
        t = (np.arange(n) + 0.5) / fs
        env = np.exp(-0.5 * ((t - d / 2) / sig) ** 2)
        env[np.abs(t - d / 2) > min(3 * sig, d / 2)] = 0.0
        expected.extend(amp * env * np.cos(2 * np.pi * 6e9 * t))
        expected.extend([0.0] * int(np.floor(gap * fs + 0.5)))
    exp_codes = np.clip(np.floor(np.abs(127.5 + 127.5 * np.array(expected)) + 0.5), 0, 255)
    assert np.array_equal(got[: len(expected)], exp_codes.astype(np.uint8))
    assert np.all(got[len(expected) :] == 128)


def test_program_too_long():
    with pytest.raises(ProgramTooLong):
        wavec.synth(single_segment(fs=20e9, envelope="square", duration=2e-6))


def test_aliased_carrier():
    with pytest.raises(AliasedCarrier):
        wavec.synth(single_segment(fs=10e9, envelope="square", duration=1e-8,
                                   carrier_frequency=5e9))
    with pytest.raises(AliasedCarrier):
        wavec.synth(PulseProgram(
            segments=(PulseSegment(envelope="square", duration=1e-8),),
            sample_rate=10e9, tones=(Tone(0.5, 6e9),)))


def test_program_validation():
    with pytest.raises(InvalidProgram):
        PulseProgram(segments=(), sample_rate=1e9)
    with pytest.raises(InvalidProgram):
        PulseSegment(envelope="square", duration=0.0)
    with pytest.raises(InvalidProgram):
        PulseSegment(envelope="gaussian", duration=1e-9)  # sigma required
    with pytest.raises(InvalidProgram):
        PulseSegment(envelope="square", duration=1e-9, amplitude=1.2)
    with pytest.raises(InvalidProgram):
        PulseProgram(
            segments=(PulseSegment(envelope="square", duration=1e-9),),
            sample_rate=1e9,
            tones=(Tone(0.7, 1e8), Tone(0.5, 2e8)),
        )
