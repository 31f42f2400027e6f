import json
import math

import numpy as np
import pytest

from momentcrit import report
from momentcrit.witnesses import registry as reg
from momentcrit.witnesses.verdict import CLASSICAL, ENTANGLED, NONCLASSICAL, decide


@pytest.mark.parametrize("obj,expected", [
    (1 + 2j, [1.0, 2.0]),
    (np.complex128(0.5 - 1j), [0.5, -1.0]),
    (np.float64(0.1), 0.1),
    (np.int64(3), 3),
    (np.bool_(True), True),
    (math.nan, "nan"),
    (-math.inf, "-inf"),
    (np.array([[1, 2j]]), [[[1.0, 0.0], [0.0, 2.0]]]),
    ((1, "a", None), [1, "a", None]),
])
def test_to_jsonable(obj, expected):
    assert report.to_jsonable(obj) == expected


def test_to_jsonable_rejects_objects():
    with pytest.raises(TypeError):
        report.to_jsonable(object())


def test_floats_round_trip():
    x = 0.1 + 0.2
    assert json.loads(report.dumps({"x": x}))["x"] == x


def test_dumps_sorted_and_stable():
    a = report.to_jsonable({"b": 1, "a": [1.5, 2j]})
    assert report.dumps(a) == report.dumps(report.to_jsonable({"a": [1.5, 2j], "b": 1}))
    doc = report.to_jsonable({"b": 1, "a": 2})
    assert report.dumps(doc).index('"a"') < report.dumps(doc).index('"b"')
    assert report.dumps(doc).endswith("\n")


@pytest.mark.parametrize("labels,code", [
    ([], report.EXIT_OK),
    ([CLASSICAL], report.EXIT_OK),
    ([CLASSICAL, NONCLASSICAL], report.EXIT_NONCLASSICAL),
    ([NONCLASSICAL, ENTANGLED], report.EXIT_ENTANGLED),
])
def test_exit_code(labels, code):
    assert report.exit_code(labels) == code


def test_verdict_record_matrices(tmsv_half):
    v = reg.run("table2.hz.x4", tmsv_half)
    plain = report.verdict_record(v)
    full = report.verdict_record(v, embed_matrices=True)
    assert all("entries" not in m for m in plain["matrices"])
    assert all("entries" in m for m in full["matrices"])
    entry = full["matrices"][0]["entries"][0][1]
    assert isinstance(entry, list) and len(entry) == 2


def test_document_timing_optional():
    v = decide("w", 1.0, 0.0, 1e-8, NONCLASSICAL)
    body = {"summary": report.summary([v])}
    doc = report.document("run", input={}, tolerances={}, body=body)
    assert "wall_clock_seconds" not in doc
    assert doc["tool"]["name"] == "momentcrit"
    assert report.document("run", input={}, tolerances={}, body=body, wall_clock=0.5)["wall_clock_seconds"] == 0.5
