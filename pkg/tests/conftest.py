import json

import pytest

TWO_TONE_PROGRAM = {
    "sample_rate_ghz": 20.48,
    "segments": [
        {"envelope": "raised_cosine", "duration_ns": 200.0, "amplitude": 1.0}
    ],
    "tones": [
        {"amplitude": 0.45, "frequency_ghz": 5.1},
        {"amplitude": 0.45, "frequency_ghz": 5.3},
    ],
}


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


@pytest.fixture
def two_tone_program(tmp_path):
    return write_json(tmp_path / "two_tone.json", TWO_TONE_PROGRAM)
