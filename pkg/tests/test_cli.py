"""CLI subcommands, exit codes, and the end-to-end simulate pipeline."""

import json

import numpy as np
import pytest

from rfawg import cli, patgen
from tests.conftest import TWO_TONE_PROGRAM, write_json


def run(argv):
    return cli.main([str(a) for a in argv])


def test_compile_writes_fixed_size_image(two_tone_program, tmp_path, capsys):
    out = tmp_path / "img.bin"
    assert run(["compile", two_tone_program, "-o", out]) == 0
    assert out.stat().st_size == 32784
    assert "4096 samples" in capsys.readouterr().out


def test_compile_too_long_program_exits_2(tmp_path, capsys):
    doc = {
        "sample_rate_ghz": 20.0,
        "segments": [{"envelope": "square", "duration_ns": 2000.0, "carrier_ghz": 1.0}],
    }
    prog = write_json(tmp_path / "long.json", doc)
    assert run(["compile", prog, "-o", tmp_path / "x.bin"]) == 2
    assert "ProgramTooLong" in capsys.readouterr().err


def test_compile_is_deterministic(two_tone_program, tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    run(["compile", two_tone_program, "-o", a])
    run(["compile", two_tone_program, "-o", b])
    assert a.read_bytes() == b.read_bytes()


def test_disasm_round_trip(two_tone_program, tmp_path):
    img = tmp_path / "img.bin"
    run(["compile", two_tone_program, "-o", img])
    csv = tmp_path / "codes.csv"
    assert run(["disasm", img, "-o", csv]) == 0
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "sample_index,code"
    codes = np.array([int(l.split(",")[1]) for l in lines[1:]], dtype=np.uint8)
    assert np.array_equal(codes, patgen.unpack_image(patgen.read_image(img)))


def test_simulate_dc_ramp_reports_linearity(tmp_path):
    scen = write_json(tmp_path / "ramp.json", {
        "stimulus": {"type": "dc_ramp", "samples_per_code": 32},
        "clock": {"sample_rate_ghz": 10.0},
        "analyses": {"linearity": {}},
    })
    out = tmp_path / "out"
    assert run(["simulate", scen, "--out-dir", out]) == 0
    report = json.loads((out / "report.json").read_text())
    lin = report["analyses"]["linearity"]
    assert lin["max_inl_lsb"] == 0.0
    assert lin["max_dnl_lsb"] == 0.0
    assert len(lin["inl_lsb"]) == 256
    assert (out / "trace.csv").exists()


def test_simulate_two_tone_reports_im3(two_tone_program, tmp_path):
    scen = write_json(tmp_path / "tt.json", {
        "stimulus": {"type": "program", "path": "two_tone.json"},
        "analyses": {"im3": {"f1_ghz": 5.1, "f2_ghz": 5.3, "record": 32768}},
    })
    out = tmp_path / "out"
    assert run(["simulate", scen, "--out-dir", out]) == 0
    report = json.loads((out / "report.json").read_text())
    assert "im3_dbc" in report["analyses"]["im3"]
    assert report["analyses"]["im3"]["im3_dbc"] < -20
    assert (out / "spectrum.csv").read_text().startswith("freq_hz,dbfs")


def test_simulate_power_only_has_exactly_power_block(tmp_path):
    scen = write_json(tmp_path / "pw.json", {
        "stimulus": {"type": "square", "period_samples": 4, "samples": 256},
        "clock": {"sample_rate_ghz": 14.0},
        "analyses": {"power": {"supply_v": 0.8}},
    })
    out = tmp_path / "out"
    assert run(["simulate", scen, "--out-dir", out]) == 0
    report = json.loads((out / "report.json").read_text())
    assert set(report["analyses"]) == {"power"}
    assert report["analyses"]["power"]["digital_mw"] == pytest.approx(
        0.2 * report["analyses"]["power"]["total_mw"]
    )


def test_simulate_reports_are_reproducible(two_tone_program, tmp_path):
    scen = write_json(tmp_path / "tt.json", {
        "stimulus": {"type": "program", "path": "two_tone.json"},
        "rng_seed": 1234,
        "analyses": {"sfdr": {"tones_ghz": [5.1, 5.3], "record": 32768}},
    })
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    run(["simulate", scen, "--out-dir", out1])
    run(["simulate", scen, "--out-dir", out2])
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()
    report = json.loads((out1 / "report.json").read_text())
    assert report["seed"] == 1234
    assert len(report["config_hash"]) == 64
    assert report["tool_version"]


def test_simulate_missing_file_exits_2(tmp_path, capsys):
    scen = write_json(tmp_path / "bad.json", {
        "stimulus": {"type": "program", "path": "nope.json"},
        "analyses": {},
    })
    assert run(["simulate", scen]) == 2
    assert "missing config file" in capsys.readouterr().err


def test_simulate_jitter_scenario(tmp_path):
    scen = write_json(tmp_path / "jit.json", {
        "stimulus": {"type": "square", "period_samples": 2, "samples": 12000},
        "clock": {"sample_rate_ghz": 10.0, "duty_cycle_error_ui": 0.01},
        "dac": {"output_rise_time_ns": 0.02},
        "oversample": 16,
        "analyses": {"jitter": {"mode": "clock"}},
    })
    out = tmp_path / "out"
    assert run(["simulate", scen, "--out-dir", out]) == 0
    jit = json.loads((out / "report.json").read_text())["analyses"]["jitter"]
    assert jit["dj_pkpk_ps"] == pytest.approx(2 * 0.01 * 100.0, rel=0.15)


def test_ffe_train_identity_channel(tmp_path, capsys):
    ch = write_json(tmp_path / "ch.json", [1.0])
    taps_file = tmp_path / "taps.json"
    assert run(["ffe-train", ch, "--taps", "4", "-o", taps_file]) == 0
    doc = json.loads(taps_file.read_text())
    assert doc["taps"] == [1.0, 0.0, 0.0, 0.0]
    assert doc["main_tap_index"] == 0


def test_ffe_train_reference_channel_prints_reduction(tmp_path, capsys):
    from rfawg.equalizer import reference_channel
    ch = write_json(tmp_path / "ref.json", {"taps": reference_channel().taps.tolist()})
    assert run(["ffe-train", ch, "--taps", "5", "-o", tmp_path / "taps.json"]) == 0
    txt = capsys.readouterr().out
    reduction = float(txt.rsplit("(", 1)[1].split("%")[0])
    assert reduction >= 35


def test_ffe_train_zero_taps_exits_2(tmp_path, capsys):
    ch = write_json(tmp_path / "ch.json", [1.0])
    assert run(["ffe-train", ch, "--taps", "0", "-o", tmp_path / "t.json"]) == 2


def test_compile_with_trained_ffe(two_tone_program, tmp_path):
    ch = write_json(tmp_path / "ch.json", [1.0, 0.25])
    taps_file = tmp_path / "taps.json"
    run(["ffe-train", ch, "--taps", "3", "-o", taps_file])
    out = tmp_path / "eq.bin"
    assert run(["compile", two_tone_program, "--ffe", taps_file, "-o", out]) == 0
    plain = tmp_path / "plain.bin"
    run(["compile", two_tone_program, "-o", plain])
    assert out.read_bytes() != plain.read_bytes()


def test_analyze_existing_trace(two_tone_program, tmp_path):
    scen = write_json(tmp_path / "tt.json", {
        "stimulus": {"type": "program", "path": "two_tone.json"},
        "analyses": {},
    })
    out = tmp_path / "out"
    run(["simulate", scen, "--out-dir", out])
    sel = write_json(tmp_path / "sel.json", {
        "im3": {"f1_ghz": 5.1, "f2_ghz": 5.3, "record": 32768, "full_scale_v": 1.0}
    })
    report_file = tmp_path / "re.json"
    assert run(["analyze", out / "trace.csv", sel,
                "--sample-rate-ghz", "20.48", "-o", report_file]) == 0
    report = json.loads(report_file.read_text())
    assert "im3_dbc" in report["analyses"]["im3"]


def test_analyze_rejects_linearity(tmp_path, two_tone_program):
    scen = write_json(tmp_path / "tt.json", {
        "stimulus": {"type": "program", "path": "two_tone.json"}, "analyses": {},
    })
    out = tmp_path / "out"
    run(["simulate", scen, "--out-dir", out])
    sel = write_json(tmp_path / "sel.json", {"linearity": {}})
    assert run(["analyze", out / "trace.csv", sel, "--sample-rate-ghz", "20.48"]) == 2


def test_simulate_eye_scenario_with_channel(tmp_path):
    ch = write_json(tmp_path / "ch.json", [1.0, 0.35])
    scen = write_json(tmp_path / "eye.json", {
        "stimulus": {"type": "prbs", "amplitude": 0.8, "periods": 4, "seed": 127},
        "clock": {"sample_rate_ghz": 20.0},
        "channel": "ch.json",
        "dac": {"output_rise_time_ns": 0.01},
        "analyses": {"eye": {"time_bins": 64, "voltage_bins": 32}},
    })
    out = tmp_path / "out"
    assert run(["simulate", scen, "--out-dir", out]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["analyses"]["eye"]["vertical_opening_v"] > 0
    assert (out / "eye.csv").exists()


def test_unknown_analysis_exits_2(tmp_path, capsys):
    scen = write_json(tmp_path / "bad.json", {
        "stimulus": {"type": "square", "samples": 256},
        "clock": {"sample_rate_ghz": 10.0},
        "analyses": {"wibble": {}},
    })
    assert run(["simulate", scen]) == 2
