import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coagfrag.io import CSVFormatError, read_csv, write_csv, write_json, write_table

finite = st.floats(allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(finite, finite), max_size=30))
def test_csv_round_trip_is_exact(tmp_path_factory, rows):
    p = tmp_path_factory.mktemp("csv") / "t.csv"
    write_csv(p, ["a", "b"], rows)
    got = read_csv(p, ["a", "b"])
    assert got["a"].tolist() == [r[0] for r in rows]
    assert got["b"].tolist() == [r[1] for r in rows]


def test_csv_layout(tmp_path):
    p = write_csv(tmp_path / "x.csv", ["i", "x"], [(1, 0.1), (2, np.float64(0.2))])
    raw = p.read_bytes()
    assert raw == b"i,x\n1,0.1\n2,0.2\n"


def test_header_only(tmp_path):
    p = write_csv(tmp_path / "e.csv", ["x", "y"], [])
    assert p.read_text() == "x,y\n"
    assert read_csv(p, ["x"])["x"].size == 0


@pytest.mark.parametrize(
    "text,match",
    [
        ("", "line 1: missing header"),
        ("x,t\n1,2\n", "line 1: missing column"),
        ("x,t,mu\n1,2,3\n1,2\n", "line 3: expected 3 fields"),
        ("x,t,mu\n1,2,3\n4,5,abc\n", "line 3: column 'mu' is not a number"),
        ("x,t,mu\n1,2,nan\n", "line 2: column 'mu' is not finite"),
    ],
)
def test_malformed_csv(tmp_path, text, match):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(CSVFormatError, match=match):
        read_csv(p, ["x", "t", "mu"])


def test_json_handles_numpy(tmp_path):
    p = write_json(tmp_path / "a.json", {"a": np.float64(1.5), "b": np.arange(3), "c": np.bool_(True)})
    assert json.loads(p.read_text()) == {"a": 1.5, "b": [0, 1, 2], "c": True}


def test_table_formats(tmp_path):
    assert write_table(tmp_path / "t", ["a"], [(1.0,)], "csv").name == "t.csv"
    p = write_table(tmp_path / "t", ["a"], [(1.0,)], "json")
    assert p.name == "t.table.json"
    assert json.loads(p.read_text()) == {"columns": ["a"], "rows": [[1.0]]}
    with pytest.raises(ValueError):
        write_table(tmp_path / "t", ["a"], [], "xml")
