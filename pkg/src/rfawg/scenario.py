"""Scenario loading and the end-to-end simulation pipeline.

A scenario JSON names a stimulus (pulse program, raw image, or one of
the builtin generators), the DAC / clock / channel configurations, and
the analyses to run. Config files use ns, GHz, V, mW; reports carry the
unit in each key. The pipeline is image -> sequencer -> serializer ->
DAC render -> channel -> analyses, and is reproducible byte-for-byte
for a fixed scenario + seed.
"""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, analysis, clocktree, dacmodel, equalizer, patgen, wavec
from .errors import InvalidConfig
from .dacmodel import AnalogTrace, DacConfig
from .equalizer import ChannelModel, FfeTaps

GHZ = 1e9
NS = 1e-9

ANALYSIS_KINDS = ("sfdr", "im3", "thd", "linearity", "jitter", "eye", "power")
STIMULUS_KINDS = ("program", "image", "dc_ramp", "prbs", "square")


# ---------------------------------------------------------------- loaders

def _load_json(path: Path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InvalidConfig(f"missing config file {path}")
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise InvalidConfig(f"{where}: missing field {key!r}")
    return doc[key]


def load_pulse_program(doc: dict) -> wavec.PulseProgram:
    """Pulse program from its JSON document (units ns, GHz, radians)."""
    rate = _require(doc, "sample_rate_ghz", "pulse program") * GHZ
    segments = []
    for i, seg in enumerate(_require(doc, "segments", "pulse program")):
        where = f"segments[{i}]"
        sigma = seg.get("sigma_ns")
        segments.append(
            wavec.PulseSegment(
                envelope=_require(seg, "envelope", where),
                duration=_require(seg, "duration_ns", where) * NS,
                amplitude=seg.get("amplitude", 1.0),
                carrier_frequency=seg.get("carrier_ghz", 0.0) * GHZ,
                phase=seg.get("phase_rad", 0.0),
                sigma=sigma * NS if sigma is not None else None,
            )
        )
    tones = tuple(
        wavec.Tone(
            amplitude=_require(t, "amplitude", f"tones[{i}]"),
            frequency=_require(t, "frequency_ghz", f"tones[{i}]") * GHZ,
            phase=t.get("phase_rad", 0.0),
        )
        for i, t in enumerate(doc.get("tones", []))
    )
    return wavec.PulseProgram(segments=tuple(segments), sample_rate=rate, tones=tones)


def load_dac_config(doc: dict) -> DacConfig:
    return DacConfig(
        full_scale_voltage=doc.get("full_scale_v", 1.0),
        weight_mismatch=np.asarray(doc.get("weight_mismatch", np.zeros(9)), dtype=float),
        output_rise_time=doc.get("output_rise_time_ns", 0.0) * NS,
    )


def load_clock_config(doc: dict, seed: int, sample_rate: float | None = None) -> clocktree.ClockConfig:
    """Clock config; sample rate falls back to the stimulus rate if given."""
    if "sample_rate_ghz" in doc:
        rate = doc["sample_rate_ghz"] * GHZ
    elif sample_rate is not None:
        rate = sample_rate
    else:
        raise InvalidConfig("clock: sample_rate_ghz required for this stimulus")
    return clocktree.ClockConfig(
        sample_rate=rate,
        duty_cycle_error=doc.get("duty_cycle_error_ui", 0.0),
        quadrature_error=doc.get("quadrature_error_ui", 0.0),
        rj_sigma=doc.get("rj_sigma_ns", 0.0) * NS,
        rng_seed=seed,
    )


def load_channel(doc) -> ChannelModel:
    taps = doc["taps"] if isinstance(doc, dict) else doc
    return ChannelModel(taps=np.asarray(taps, dtype=float))


def load_ffe_taps(doc) -> FfeTaps:
    if isinstance(doc, dict):
        return FfeTaps(
            taps=np.asarray(doc["taps"], dtype=float),
            main_tap_index=int(doc.get("main_tap_index", 0)),
        )
    return FfeTaps(taps=np.asarray(doc, dtype=float), main_tap_index=0)


# ----------------------------------------------------------- trace / CSV

def write_trace_csv(trace: AnalogTrace, path: Path) -> None:
    with open(path, "w") as fh:
        fh.write("time_s,voltage_v\n")
        for i, v in enumerate(trace.samples):
            fh.write(f"{i * trace.sample_period:.9g},{v:.9g}\n")


def read_trace_csv(path: Path) -> AnalogTrace:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise InvalidConfig(f"{path}: expected two CSV columns time_s,voltage_v")
    times, volts = data[:, 0], data[:, 1]
    return AnalogTrace(samples=volts, sample_period=float(times[1] - times[0]))


def write_spectrum_csv(spec: analysis.Spectrum, path: Path) -> None:
    with open(path, "w") as fh:
        fh.write("freq_hz,dbfs\n")
        for f, m in zip(spec.frequencies, spec.dbfs):
            fh.write(f"{f:.9g},{m:.9g}\n")


def write_levels_csv(levels, path: Path) -> None:
    with open(path, "w") as fh:
        fh.write("code,voltage_v\n")
        for c, v in enumerate(levels):
            fh.write(f"{c},{v:.9g}\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


# ------------------------------------------------------------- scenario

@dataclass
class Scenario:
    stimulus: dict
    dac: DacConfig
    clock_doc: dict
    channel: ChannelModel | None
    ffe: FfeTaps | None
    sequencer: patgen.SequencerConfig
    oversample: int
    analyses: dict
    seed: int
    resolved: dict  # fully inlined config, hashed into every report

    @property
    def config_hash(self) -> str:
        blob = json.dumps(_jsonable(self.resolved), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def load_scenario(path, seed_override: int | None = None) -> Scenario:
    path = Path(path)
    doc = _load_json(path)
    base = path.parent

    def resolve(field):
        """Inline a path-or-object field; returns (document, resolved form)."""
        value = doc.get(field)
        if value is None:
            return None, None
        if isinstance(value, str):
            sub = _load_json(base / value)
            return sub, sub
        return value, value

    stimulus = _require(doc, "stimulus", "scenario")
    kind = _require(stimulus, "type", "stimulus")
    if kind not in STIMULUS_KINDS:
        raise InvalidConfig(f"stimulus type {kind!r} not one of {STIMULUS_KINDS}")

    resolved = {"scenario": {k: v for k, v in doc.items() if k not in
                             ("stimulus", "dac", "clock", "channel", "ffe")}}
    resolved["stimulus"] = dict(stimulus)
    if kind in ("program", "image"):
        spath = base / _require(stimulus, "path", "stimulus")
        if kind == "program":
            resolved["stimulus"]["document"] = _load_json(spath)
        else:
            try:
                resolved["stimulus"]["sha256"] = hashlib.sha256(spath.read_bytes()).hexdigest()
            except FileNotFoundError:
                raise InvalidConfig(f"missing image file {spath}")
            resolved["stimulus"]["resolved_path"] = str(spath)

    dac_doc, resolved["dac"] = resolve("dac")
    clock_doc, resolved["clock"] = resolve("clock")
    channel_doc, resolved["channel"] = resolve("channel")
    ffe_doc, resolved["ffe"] = resolve("ffe")

    analyses = doc.get("analyses", {})
    for name in analyses:
        if name not in ANALYSIS_KINDS:
            raise InvalidConfig(f"unknown analysis {name!r}, valid: {ANALYSIS_KINDS}")

    seq_doc = doc.get("sequencer", {})
    seed = seed_override if seed_override is not None else int(doc.get("rng_seed", 0))
    resolved["seed"] = seed

    return Scenario(
        stimulus=resolved["stimulus"],
        dac=load_dac_config(dac_doc or {}),
        clock_doc=clock_doc or {},
        channel=load_channel(channel_doc) if channel_doc is not None else None,
        ffe=load_ffe_taps(ffe_doc) if ffe_doc is not None else None,
        sequencer=patgen.SequencerConfig(
            start_frame=seq_doc.get("start_frame", 0),
            frame_count=seq_doc.get("frame_count"),
            loop_count=seq_doc.get("loop_count", 1),
            byte_rotation=seq_doc.get("byte_rotation", 0),
        ),
        oversample=int(doc.get("oversample", 8)),
        analyses=analyses,
        seed=seed,
        resolved=resolved,
    )


def _build_stimulus(sc: Scenario):
    """SRAM image for the scenario; returns (image, sample_rate|None, clip_count)."""
    stim = sc.stimulus
    kind = stim["type"]
    clips = 0

    if kind == "program":
        program = load_pulse_program(stim["document"])
        samples = wavec.synth(program)
        if sc.ffe is not None:
            samples, clips = equalizer.apply_ffe(samples, sc.ffe)
        return patgen.pack_image(wavec.quantize(samples)), program.sample_rate, clips

    if kind == "image":
        if sc.ffe is not None:
            raise InvalidConfig("ffe applies pre-quantization; not available for raw images")
        return patgen.read_image(stim["resolved_path"]), None, 0

    if kind == "dc_ramp":
        per_code = int(stim.get("samples_per_code", 64))
        if not 1 <= per_code <= patgen.CAPACITY // 256:
            raise InvalidConfig("samples_per_code must keep the ramp within memory")
        codes = np.repeat(np.arange(256, dtype=np.uint8), per_code)
        return patgen.pack_image(codes), None, 0

    if kind == "prbs":
        amp = float(stim.get("amplitude", 0.5))
        periods = int(stim.get("periods", 8))
        bits = equalizer.prbs7(int(stim.get("seed", 0x7F)), 127 * periods)
        samples = amp * (2.0 * bits.astype(float) - 1.0)
        if sc.ffe is not None:
            samples, clips = equalizer.apply_ffe(samples, sc.ffe)
        return patgen.pack_image(wavec.quantize(samples)), None, clips

    # square: alternating rails, period_samples per full cycle
    period = int(stim.get("period_samples", 2))
    count = int(stim.get("samples", 4096))
    if period < 2 or period % 2:
        raise InvalidConfig("square period_samples must be even and >= 2")
    if sc.ffe is not None:
        raise InvalidConfig("ffe not supported for the square builtin")
    amp = float(stim.get("amplitude", 1.0))
    cycle = np.concatenate([np.full(period // 2, amp), np.full(period // 2, -amp)])
    samples = np.tile(cycle, -(-count // period))[:count]
    return patgen.pack_image(wavec.quantize(samples)), None, 0


def run_scenario(sc: Scenario, out_dir) -> dict:
    """Run the full pipeline and write trace CSV + report JSON artifacts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    image, stim_rate, clip_count = _build_stimulus(sc)
    clock = load_clock_config(sc.clock_doc, seed=sc.seed, sample_rate=stim_rate)

    frames = patgen.run_sequencer(image, sc.sequencer)
    streams = patgen.serialize(frames)
    codes = patgen.decode_streams(streams)

    edges = clocktree.derive_edges(codes.size, clock)
    trace = dacmodel.render(codes, edges.edge_times, sc.dac, sc.oversample)
    if sc.channel is not None:
        trace = equalizer.apply_channel_to_trace(trace, sc.channel, sc.oversample)
    write_trace_csv(trace, out_dir / "trace.csv")

    report = {
        "tool": "rfawg",
        "tool_version": __version__,
        "seed": sc.seed,
        "config_hash": sc.config_hash,
        "sample_rate_ghz": clock.sample_rate / GHZ,
        "n_codes": int(codes.size),
        "clip_count": int(clip_count),
        "analyses": run_analyses(
            sc.analyses, trace,
            sample_rate=clock.sample_rate,
            oversample=sc.oversample,
            codes=codes,
            dac=sc.dac,
            out_dir=out_dir,
        ),
    }
    report_json = json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"
    (out_dir / "report.json").write_text(report_json)
    return report


def run_analyses(selections: dict, trace: AnalogTrace, *, sample_rate: float,
                 oversample: int | None = None, codes=None, dac: DacConfig | None = None,
                 out_dir: Path | None = None) -> dict:
    """Dispatch the selected analyses over a rendered (or loaded) trace."""
    results = {}
    ui = 1.0 / sample_rate

    def default_record():
        return 1 << int(np.log2(len(trace)))

    for name, params in selections.items():
        if name == "power":
            rep = analysis.power_model(sample_rate, params.get("supply_v", 0.8))
            results["power"] = {
                "total_mw": rep.total, "analog_mw": rep.analog,
                "digital_mw": rep.digital, "per_qubit_mw": rep.per_qubit,
                "supply_v": params.get("supply_v", 0.8),
                "sample_rate_ghz": sample_rate / GHZ,
            }
            continue

        if name in ("sfdr", "im3", "thd"):
            record = int(params.get("record", default_record()))
            full_scale = dac.full_scale_voltage if dac is not None else params.get("full_scale_v", 2.0)
            if name == "sfdr":
                tones = [f * GHZ for f in params["tones_ghz"]]
                spec = analysis.spectrum(trace, record, tones=tones, full_scale=full_scale)
                bins = [spec.bin_of(f) for f in tones]
                results["sfdr"] = {
                    "sfdr_db": analysis.sfdr(spec, bins),
                    "signal_bins": bins, "record": record,
                }
            elif name == "im3":
                f1, f2 = params["f1_ghz"] * GHZ, params["f2_ghz"] * GHZ
                spec = analysis.spectrum(trace, record, tones=[f1, f2], full_scale=full_scale)
                results["im3"] = {
                    "im3_dbc": analysis.im3(spec, f1, f2),
                    "f1_ghz": f1 / GHZ, "f2_ghz": f2 / GHZ, "record": record,
                }
            else:
                f0 = params["f0_ghz"] * GHZ
                spec = analysis.spectrum(trace, record, tones=[f0], full_scale=full_scale)
                results["thd"] = {
                    "thd_percent": analysis.thd(spec, f0, params.get("n_harmonics", 5)),
                    "f0_ghz": f0 / GHZ, "record": record,
                }
            if out_dir is not None:
                write_spectrum_csv(spec, out_dir / "spectrum.csv")
            continue

        if name == "linearity":
            if codes is None or oversample is None:
                raise InvalidConfig("linearity analysis needs the stimulus code sequence")
            levels = analysis.measure_ramp_levels(trace, codes, oversample)
            rep = analysis.inl_dnl(levels)
            if out_dir is not None:
                write_levels_csv(levels, out_dir / "levels.csv")
            results["linearity"] = {
                "max_inl_lsb": rep.max_inl, "max_dnl_lsb": rep.max_dnl,
                "inl_lsb": rep.inl, "dnl_lsb": rep.dnl,
            }
            continue

        if name == "jitter":
            threshold = (trace.samples.max() + trace.samples.min()) / 2.0
            crossings = analysis.find_crossings(trace, threshold)
            mode = params.get("mode", "data")
            if mode == "clock":
                period = params.get("crossing_period_ui", 1) * ui
                rep = analysis.jitter_decompose(crossings, period)
                results["jitter"] = {
                    "mode": "clock", "tj_ps": rep.total / 1e-12,
                    "rj_ps": rep.random_sigma / 1e-12,
                    "dj_pkpk_ps": rep.deterministic / 1e-12,
                    "n_crossings": int(crossings.size),
                }
            else:
                tie = analysis.edge_tie(crossings, ui)
                results["jitter"] = {
                    "mode": "data",
                    "dj_pkpk_ps": float(np.ptp(tie)) / 1e-12,
                    "tie_rms_ps": float(tie.std()) / 1e-12,
                    "n_crossings": int(crossings.size),
                }
            continue

        if name == "eye":
            bins = (params.get("time_bins", 128), params.get("voltage_bins", 64))
            eye = analysis.eye_diagram(trace, ui, bins=bins)
            threshold = (trace.samples.max() + trace.samples.min()) / 2.0
            results["eye"] = {
                "vertical_opening_v": analysis.eye_opening(trace, ui, threshold),
                "time_bins": bins[0], "voltage_bins": bins[1],
            }
            if out_dir is not None:
                np.savetxt(out_dir / "eye.csv", eye.counts, fmt="%d", delimiter=",")
                results["eye"]["csv"] = "eye.csv"
            continue

    return results
