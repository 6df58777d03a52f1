"""Desk-scale simulator of an SRAM-based RF arbitrary waveform generator.

Pattern memory and serializer chain, segmented 8-bit DAC with mismatch,
jittered clock tree, cable channel with feed-forward equalization, a
pulse-program compiler, and the metrology to characterize all of it.
"""

__version__ = "0.1.0"

from .clocktree import ClockConfig, EdgeSchedule, derive_edges, subrate_indices
from .dacmodel import AnalogTrace, DacConfig, build_level_table, level_of, render, thermometer_encode
from .equalizer import (
    ChannelModel,
    FfeTaps,
    apply_channel,
    apply_ffe,
    prbs7,
    reference_channel,
    solve_ffe,
)
from .patgen import (
    BitPlaneStreams,
    SequencerConfig,
    SramImage,
    pack_image,
    read_image,
    run_sequencer,
    serialize,
    unpack_image,
    write_image,
)
from .wavec import PulseProgram, PulseSegment, Tone, dequantize, quantize, synth

__all__ = [
    "__version__",
    "AnalogTrace", "BitPlaneStreams", "ChannelModel", "ClockConfig", "DacConfig",
    "EdgeSchedule", "FfeTaps", "PulseProgram", "PulseSegment", "SequencerConfig",
    "SramImage", "Tone",
    "apply_channel", "apply_ffe", "build_level_table", "derive_edges", "dequantize",
    "level_of", "pack_image", "prbs7", "quantize", "read_image", "reference_channel",
    "render", "run_sequencer", "serialize", "solve_ffe", "subrate_indices",
    "synth", "thermometer_encode", "unpack_image", "write_image",
]
