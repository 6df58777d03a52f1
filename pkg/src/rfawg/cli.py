"""Command-line frontend.

Subcommands: compile, simulate, ffe-train, analyze, disasm.
Exit codes: 0 ok, 2 configuration error, 3 runtime error.
"""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, analysis, equalizer, patgen, scenario, wavec
from .errors import AnalysisError, ValidationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

# settings for the predicted-DJ summary printed by ffe-train
_TRAIN_RATE = 20e9
_TRAIN_PRBS_AMPLITUDE = 0.4
_TRAIN_PRBS_PERIODS = 8


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rfawg", description="SRAM-based RF AWG simulator")
    p.add_argument("--version", action="version", version=f"rfawg {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a pulse program into an SRAM image")
    c.add_argument("program", type=Path, help="pulse program JSON")
    c.add_argument("--ffe", type=Path, help="FFE taps JSON to bake into the pattern")
    c.add_argument("-o", "--out", type=Path, required=True, help="output image file")

    s = sub.add_parser("simulate", help="run scenario(s) end to end")
    s.add_argument("scenarios", type=Path, nargs="+", help="scenario JSON file(s)")
    s.add_argument("--seed", type=int, help="override the scenario rng_seed")
    s.add_argument("--out-dir", type=Path, help="output directory (default: per scenario)")
    s.add_argument("--jobs", type=int, default=1, help="run scenarios in N processes")

    f = sub.add_parser("ffe-train", help="solve least-squares FFE taps for a channel")
    f.add_argument("channel", type=Path, help="channel taps JSON")
    f.add_argument("--taps", type=int, default=5, help="number of FFE taps")
    f.add_argument("--main-tap", type=int, default=0, help="main cursor position")
    f.add_argument("-o", "--out", type=Path, required=True, help="output taps JSON")

    a = sub.add_parser("analyze", help="re-run metrics on an existing trace CSV")
    a.add_argument("trace", type=Path, help="trace CSV (time_s,voltage_v)")
    a.add_argument("analyses", type=Path, help="JSON file with the analyses block")
    a.add_argument("--sample-rate-ghz", type=float, required=True)
    a.add_argument("--full-scale-v", type=float, default=2.0)
    a.add_argument("-o", "--out", type=Path, help="report JSON (default stdout)")

    d = sub.add_parser("disasm", help="dump an SRAM image back to sample codes")
    d.add_argument("image", type=Path, help="image file")
    d.add_argument("-o", "--out", type=Path, help="CSV output (default stdout)")
    return p


def cmd_compile(args) -> int:
    doc = scenario._load_json(args.program)
    program = scenario.load_pulse_program(doc)
    ffe = scenario.load_ffe_taps(scenario._load_json(args.ffe)) if args.ffe else None

    samples = wavec.synth(program)
    clip_count = 0
    if ffe is not None:
        samples, clip_count = equalizer.apply_ffe(samples, ffe)
    image = patgen.pack_image(wavec.quantize(samples))
    patgen.write_image(image, args.out)
    occupancy = 100.0 * image.sample_count / patgen.CAPACITY
    print(f"compiled {image.sample_count} samples ({occupancy:.1f}% of memory) -> {args.out}")
    if clip_count:
        print(f"warning: FFE clipped {clip_count} samples")
    return EXIT_OK


def _run_one(scenario_path: Path, seed, out_dir) -> Path:
    sc = scenario.load_scenario(scenario_path, seed_override=seed)
    target = Path(out_dir) if out_dir else scenario_path.parent / (scenario_path.stem + "_out")
    scenario.run_scenario(sc, target)
    return target / "report.json"


def cmd_simulate(args) -> int:
    if args.out_dir and len(args.scenarios) > 1:
        raise ValidationError("--out-dir only applies to a single scenario")
    if args.jobs > 1 and len(args.scenarios) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_one, args.scenarios,
                                    [args.seed] * len(args.scenarios),
                                    [None] * len(args.scenarios)))
    else:
        reports = [_run_one(p, args.seed, args.out_dir) for p in args.scenarios]
    for r in reports:
        print(f"report: {r}")
    return EXIT_OK


def cmd_ffe_train(args) -> int:
    ch = scenario.load_channel(scenario._load_json(args.channel))
    taps = equalizer.solve_ffe(ch, args.taps, args.main_tap)

    isi_before = equalizer.residual_isi(ch)
    isi_after = equalizer.residual_isi(ch, taps)
    dj_before, dj_after = _predicted_dj(ch, taps)

    with open(args.out, "w") as fh:
        json.dump({"taps": taps.taps.tolist(), "main_tap_index": taps.main_tap_index}, fh, indent=2)
        fh.write("\n")
    reduction = 100.0 * (1.0 - dj_after / dj_before) if dj_before > 0 else 0.0
    print(f"taps -> {args.out}")
    print(f"residual ISI: {isi_before:.4f} -> {isi_after:.4f}")
    print(f"predicted DJ at {_TRAIN_RATE / 1e9:.0f} GS/s: "
          f"{dj_before / 1e-12:.3f} ps -> {dj_after / 1e-12:.3f} ps ({reduction:.0f}% reduction)")
    return EXIT_OK


def _predicted_dj(ch, taps) -> tuple:
    """Edge DJ pk-pk of a PRBS7 pattern through the channel, raw vs equalized."""
    from .clocktree import ClockConfig, derive_edges
    from .dacmodel import DacConfig, render

    bits = equalizer.prbs7(0x7F, 127 * _TRAIN_PRBS_PERIODS)
    samples = _TRAIN_PRBS_AMPLITUDE * (2.0 * bits.astype(float) - 1.0)
    dac = DacConfig(output_rise_time=0.2 / _TRAIN_RATE)
    clock = ClockConfig(sample_rate=_TRAIN_RATE)
    oversample = 32

    def dj_of(s):
        codes = wavec.quantize(s)
        edges = derive_edges(codes.size, clock)
        trace = render(codes, edges.edge_times, dac, oversample)
        trace = equalizer.apply_channel_to_trace(trace, ch, oversample)
        mid = (trace.samples.max() + trace.samples.min()) / 2.0
        tie = analysis.edge_tie(analysis.find_crossings(trace, mid), 1.0 / _TRAIN_RATE)
        return float(np.ptp(tie))

    equalized, _ = equalizer.apply_ffe(samples, taps)
    return dj_of(samples), dj_of(equalized)


def cmd_analyze(args) -> int:
    trace = scenario.read_trace_csv(args.trace)
    selections = scenario._load_json(args.analyses)
    if "linearity" in selections:
        raise ValidationError("linearity needs the stimulus codes; run simulate instead")
    results = scenario.run_analyses(
        selections, trace, sample_rate=args.sample_rate_ghz * scenario.GHZ,
        out_dir=args.out.parent if args.out else None,
    )
    report = json.dumps(scenario._jsonable({"tool_version": __version__, "analyses": results}),
                        sort_keys=True, indent=2) + "\n"
    if args.out:
        args.out.write_text(report)
    else:
        sys.stdout.write(report)
    return EXIT_OK


def cmd_disasm(args) -> int:
    image = patgen.read_image(args.image)
    codes = patgen.unpack_image(image)
    lines = ["sample_index,code"] + [f"{i},{c}" for i, c in enumerate(codes)]
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {
    "compile": cmd_compile,
    "simulate": cmd_simulate,
    "ffe-train": cmd_ffe_train,
    "analyze": cmd_analyze,
    "disasm": cmd_disasm,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AnalysisError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
