import json
import math
from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from nekhoroshev.io import config_hash, dumps, write_csv, write_json
from nekhoroshev.numeric import mpf


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip_exactly(x):
    assert json.loads(dumps({"x": x}))["x"] == x


def test_special_values_are_strings():
    rep = json.loads(dumps({"a": math.inf, "b": -math.inf, "c": math.nan}))
    assert rep == {"a": "inf", "b": "-inf", "c": "nan"}


def test_mixed_types():
    rep = json.loads(dumps({"f": Fraction(1, 6), "m": mpf(2) / 3, "arr": np.arange(3), "i": np.int64(4)}))
    assert rep["arr"] == [0, 1, 2]
    assert rep["i"] == 4
    assert abs(rep["m"] - 2 / 3) < 1e-16


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_atomic_writes_leave_no_temporaries(tmp_path):
    write_json(tmp_path / "r.json", {"x": 1.5})
    write_csv(tmp_path / "r.csv", ["a", "b"], [[0.1, "z"]])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["r.csv", "r.json"]
    assert (tmp_path / "r.csv").read_text() == "a,b\n0.10000000000000001,z\n"
