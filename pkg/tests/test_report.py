import json
import math

import numpy as np

from simpcoord.report import dumps, format_float


def test_float_format_round_trips():
    for x in [0.1, 1 / 3, -2.5e-300, 1e22, 123456789.123456789, 0.0, -0.0]:
        text = format_float(x)
        assert float(text) == x
        assert "." in text or "e" in text
    assert format_float(1.0) == "1.0"
    assert format_float(0.1) == "0.10000000000000001"


def test_non_finite():
    assert json.loads(dumps([math.inf, -math.inf, math.nan])) == ["inf", "-inf", "nan"]


def test_structure_and_order():
    class Obj:
        def to_dict(self):
            return {"b": 1, "a": [np.float64(0.5), np.int64(3)]}

    doc = {"z": True, "y": None, "x": Obj(), "w": (), "v": {}, "u": np.array([1.0, 2.0])}
    text = dumps(doc)
    assert list(json.loads(text)) == ["z", "y", "x", "w", "v", "u"]
    assert json.loads(text)["x"] == {"b": 1, "a": [0.5, 3]}
    assert dumps(doc) == text and text.endswith("\n")
