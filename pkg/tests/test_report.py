import json

import numpy as np
import pytest

from signalscope.report import SCHEMA_VERSION
from signalscope.report import SWEEP_COLUMNS
from signalscope.report import emit
from signalscope.report import format_real
from signalscope.report import new_document
from signalscope.report import parse_csv
from signalscope.report import to_csv
from signalscope.report import to_json


@pytest.mark.parametrize(
    "value, expected",
    [
        (0.0, "0"),
        (0.5, "0.5"),
        (1e-5, "1e-05"),
        (0.00012, "0.00012"),
        (0.123456789012345, "0.123456789012"),
        (-0.25, "-0.25"),
    ],
)
def test_format_real(value, expected):
    assert format_real(value) == expected


def test_document_header():
    document = new_document("detect", s=0.5)
    assert document["schema_version"] == SCHEMA_VERSION
    assert document["command"] == "detect"
    assert document["entropy_unit"] == "bits"
    assert document["s"] == 0.5


def test_to_json_rounds_reals_and_converts_numpy():
    text = to_json(new_document("plan", value=np.float64(1 / 3), flags=[True, None], count=3))
    assert text.endswith("\n")
    parsed = json.loads(text)
    assert parsed["value"] == 0.333333333333
    assert parsed["flags"] == [True, None]
    assert parsed["count"] == 3


def test_to_json_rejects_unknown_objects():
    with pytest.raises(TypeError):
        to_json(new_document("plan", value=object()))


def test_csv_header_and_cells():
    rows = [
        {"kind": "clone", "s": 0.1, "epsilon": 0.005, "feasible": False, "signaling": None},
        {"kind": "clone", "s": 0.5, "epsilon": 0.0, "delta": 0.0, "feasible": True, "signaling": False},
    ]
    text = to_csv(SWEEP_COLUMNS, rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert lines[1] == "clone,0.1,0.005,,,,,,,,false"
    assert lines[2] == "clone,0.5,0,,,,,,0,false,true"

    parsed = parse_csv(text)
    assert len(parsed) == 2
    assert parsed[1]["feasible"] == "true"
    assert parsed[0]["delta"] == ""


def test_emit_to_stdout_and_file(tmp_path, capsys):
    emit("hello\n")
    assert capsys.readouterr().out == "hello\n"

    path = tmp_path / "out.json"
    emit("hello\n", str(path))
    assert path.read_text() == "hello\n"
    assert capsys.readouterr().out == ""
