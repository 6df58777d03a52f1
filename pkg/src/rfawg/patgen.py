"""On-chip pattern source: SRAM banks, sequencer state machine, serializer chain.

Memory geometry is 4 banks x 512 words x 16 bytes (32 KB). One 256-bit
frame holds 32 consecutive 8-bit samples and maps to two consecutive
16-byte words of the same bank; frames are interleaved across banks:

    frame f -> bank (f % 4), words 2*(f // 4) and 2*(f // 4) + 1

Bytes within a word hold samples in ascending time order. Any region
beyond sample_count is zero-filled. The serializer chain models the
nine 32:4 serializers (one per DAC weight) followed by per-weight 4:1
muxes; the net effect preserves sample order bit-exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceeded, InvalidLoop, InvalidRange

BANKS = 4
WORDS_PER_BANK = 512
BYTES_PER_WORD = 16
CAPACITY = BANKS * WORDS_PER_BANK * BYTES_PER_WORD  # 32768 samples
FRAME_SAMPLES = 32
MAX_FRAMES = CAPACITY // FRAME_SAMPLES

PAD_CODE = 128  # midscale, so padded regions sit at the DC operating point

IMAGE_MAGIC = b"AWGIMG01"
IMAGE_HEADER_BYTES = 16

# weight-enable bit order used by the serializer and the DAC:
# three thermometer MSB segments then six binary segments, MSB first
NOMINAL_WEIGHTS = np.array([64, 64, 64, 32, 16, 8, 4, 2, 1], dtype=np.int64)
N_STREAMS = 9


@dataclass(frozen=True)
class SramImage:
    """Pattern memory contents plus the count of valid samples."""

    banks: np.ndarray  # (4, 512, 16) uint8
    sample_count: int

    def __post_init__(self):
        if self.banks.shape != (BANKS, WORDS_PER_BANK, BYTES_PER_WORD):
            raise InvalidRange(f"bank array must be {BANKS}x{WORDS_PER_BANK}x{BYTES_PER_WORD}")
        if self.banks.dtype != np.uint8:
            raise InvalidRange("bank array must be uint8")
        if not (1 <= self.sample_count <= CAPACITY):
            raise InvalidRange(f"sample_count {self.sample_count} outside [1, {CAPACITY}]")
        if self.sample_count % FRAME_SAMPLES != 0:
            raise InvalidRange(f"sample_count {self.sample_count} not a whole number of frames")

    @property
    def frame_count(self) -> int:
        return self.sample_count // FRAME_SAMPLES


@dataclass(frozen=True)
class SequencerConfig:
    start_frame: int = 0
    frame_count: int | None = None  # None = all frames of the image
    loop_count: int = 1
    byte_rotation: int = 0


@dataclass(frozen=True)
class BitPlaneStreams:
    """Nine per-weight bit streams, one bit per full-rate sample.

    Row order matches NOMINAL_WEIGHTS: T2, T1, T0, B5..B0.
    """

    bits: np.ndarray  # (9, n) uint8

    def __post_init__(self):
        if self.bits.ndim != 2 or self.bits.shape[0] != N_STREAMS:
            raise InvalidRange("bit planes must be a (9, n) array")

    def __len__(self) -> int:
        return self.bits.shape[1]


def _frame_addresses(n_frames: int):
    """Bank index and first word address for frames 0..n_frames-1."""
    f = np.arange(n_frames)
    return f % BANKS, 2 * (f // BANKS)


def pack_image(samples) -> SramImage:
    """Pack a sequence of 8-bit codes into an SRAM image.

    The input is padded up to a whole frame with midscale code 128;
    memory beyond the padded length is zero-filled.
    """
    samples = np.asarray(samples)
    n = samples.size
    if n < 1:
        raise InvalidRange("need at least one sample")
    if n > CAPACITY:
        raise CapacityExceeded(f"{n} samples exceed the {CAPACITY}-sample memory")
    if samples.min() < 0 or samples.max() > 255:
        raise InvalidRange("codes must be in [0, 255]")

    pad = (-n) % FRAME_SAMPLES
    padded = np.concatenate([samples.astype(np.uint8), np.full(pad, PAD_CODE, np.uint8)])
    n_frames = padded.size // FRAME_SAMPLES

    banks = np.zeros((BANKS, WORDS_PER_BANK, BYTES_PER_WORD), dtype=np.uint8)
    words = padded.reshape(n_frames, 2, BYTES_PER_WORD)
    bank_idx, word_idx = _frame_addresses(n_frames)
    banks[bank_idx, word_idx] = words[:, 0]
    banks[bank_idx, word_idx + 1] = words[:, 1]
    return SramImage(banks=banks, sample_count=padded.size)


def unpack_image(image: SramImage) -> np.ndarray:
    """Inverse of pack_image: the first sample_count codes in time order."""
    n_frames = image.frame_count
    bank_idx, word_idx = _frame_addresses(n_frames)
    words = np.stack([image.banks[bank_idx, word_idx], image.banks[bank_idx, word_idx + 1]], axis=1)
    return words.reshape(n_frames * FRAME_SAMPLES)[: image.sample_count]


def run_sequencer(image: SramImage, cfg: SequencerConfig) -> np.ndarray:
    """Emit pattern frames as a (frame_count * loop_count, 32) uint8 array.

    byte_rotation r rotates every 16-byte SRAM word left by r positions
    before frame assembly (output byte i = word byte (i + r) mod 16).
    """
    n_avail = image.frame_count
    count = n_avail - cfg.start_frame if cfg.frame_count is None else cfg.frame_count
    if not (0 <= cfg.byte_rotation <= BYTES_PER_WORD - 1):
        raise InvalidRange(f"byte_rotation {cfg.byte_rotation} outside 0..15")
    if cfg.loop_count < 1:
        raise InvalidLoop(f"loop_count {cfg.loop_count} must be >= 1")
    if cfg.start_frame < 0 or count < 1 or cfg.start_frame + count > n_avail:
        raise InvalidRange(
            f"frames [{cfg.start_frame}, {cfg.start_frame + count}) overflow image with {n_avail} frames"
        )

    banks = image.banks
    if cfg.byte_rotation:
        banks = np.roll(banks, -cfg.byte_rotation, axis=2)

    f = np.arange(cfg.start_frame, cfg.start_frame + count)
    bank_idx, word_idx = f % BANKS, 2 * (f // BANKS)
    frames = np.concatenate([banks[bank_idx, word_idx], banks[bank_idx, word_idx + 1]], axis=1)
    if cfg.loop_count > 1:
        frames = np.tile(frames, (cfg.loop_count, 1))
    return frames


def serialize(frames: np.ndarray) -> BitPlaneStreams:
    """Run frames through the 32:4 serializers and 4:1 muxes.

    Each of the nine serializers takes its weight-enable bit from all 32
    samples of a frame, emits them as eight quarter-rate 4-bit groups,
    and the 4:1 mux restores full rate. Output order equals sample order.
    """
    frames = np.asarray(frames, dtype=np.uint8)
    if frames.ndim != 2 or frames.shape[1] != FRAME_SAMPLES or frames.shape[0] < 1:
        raise InvalidRange("frames must be a non-empty (n, 32) array")

    n_frames = frames.shape[0]
    enables = _weight_enables(frames.reshape(-1))  # (n_samples, 9)
    # 32:4 stage: per frame and weight, 32 bits -> 8 quarter-rate nibbles
    quarter = enables.reshape(n_frames, 8, 4, N_STREAMS)
    # 4:1 stage: nibbles back out at full rate, in arrival order
    full_rate = quarter.reshape(-1, N_STREAMS)
    return BitPlaneStreams(bits=np.ascontiguousarray(full_rate.T))


def _weight_enables(codes: np.ndarray) -> np.ndarray:
    """(n, 9) enable bits per code: t-of-3 thermometer MSBs + 6 binary bits."""
    codes = codes.astype(np.uint8)
    t = codes >> 6
    cols = [(t > i).astype(np.uint8) for i in range(3)]
    cols += [((codes >> (5 - j)) & 1).astype(np.uint8) for j in range(6)]
    return np.stack(cols, axis=1)


def decode_streams(streams: BitPlaneStreams) -> np.ndarray:
    """Recombine the nine bit streams into 8-bit codes (nominal weights)."""
    return (NOMINAL_WEIGHTS @ streams.bits.astype(np.int64)).astype(np.uint8)


def write_image(image: SramImage, path) -> None:
    """Write the binary image file: 16-byte header + 32 KB bank-major payload."""
    header = IMAGE_MAGIC + int(image.sample_count).to_bytes(4, "little") + b"\x00" * 4
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(image.banks.tobytes())


def read_image(path) -> SramImage:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) != IMAGE_HEADER_BYTES + CAPACITY:
        raise InvalidRange(f"image file must be {IMAGE_HEADER_BYTES + CAPACITY} bytes, got {len(blob)}")
    if blob[:8] != IMAGE_MAGIC:
        raise InvalidRange("bad image magic")
    sample_count = int.from_bytes(blob[8:12], "little")
    banks = np.frombuffer(blob[IMAGE_HEADER_BYTES:], dtype=np.uint8).reshape(
        BANKS, WORDS_PER_BANK, BYTES_PER_WORD
    )
    return SramImage(banks=banks.copy(), sample_count=sample_count)
