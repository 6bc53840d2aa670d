import json
from dataclasses import dataclass

import numpy as np
import pytest

from sobolab.reporting import (canonical_json, config_hash, to_plain,
                               write_artifact, write_csv, write_svg_loglog)


@dataclass(frozen=True)
class Blob:
    name: str
    values: tuple


def test_to_plain_handles_numpy_and_dataclasses():
    blob = Blob(name="x", values=(np.float64(1.5), np.int64(3)))
    plain = to_plain({"b": blob, "arr": np.array([1.0, 2.0]), "flag": np.bool_(True)})
    assert plain == {"b": {"name": "x", "values": [1.5, 3]},
                     "arr": [1.0, 2.0], "flag": True}
    json.dumps(plain)  # round-trippable


def test_canonical_json_is_sorted_and_stable():
    a = canonical_json({"b": 1, "a": [2.5, 3]})
    b = canonical_json({"a": [2.5, 3], "b": 1})
    assert a == b == '{"a":[2.5,3],"b":1}'
    assert config_hash({"x": 1}) == config_hash({"x": 1})
    assert config_hash({"x": 1}) != config_hash({"x": 2})


def test_canonical_json_rejects_nan():
    with pytest.raises(ValueError):
        canonical_json({"x": float("nan")})


def test_write_artifact_content_addressed(tmp_path):
    p1 = write_artifact(tmp_path, "thing", {"v": 1})
    p2 = write_artifact(tmp_path, "thing", {"v": 1})
    p3 = write_artifact(tmp_path, "thing", {"v": 2})
    assert p1 == p2 and p1 != p3
    assert p1.exists() and p3.exists()


def test_write_csv_plain_floats(tmp_path):
    path = write_csv(tmp_path, "rows", ["a", "b"],
                     [(np.float64(0.1), 2), (0.25, np.int64(4))])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "a,b"
    assert lines[1] == "0.1,2"
    assert lines[2] == "0.25,4"


def test_write_svg_loglog(tmp_path):
    ts = np.geomspace(1e-3, 1e-2, 5)
    path = write_svg_loglog(tmp_path, "plot", ts, 1.0 / np.sqrt(ts),
                            "decay", fit_slope=-0.5)
    text = path.read_text()
    assert text.startswith("<svg")
    assert text.count("<circle") == 5
