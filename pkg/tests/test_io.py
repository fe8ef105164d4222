"""Serialization round trips, atomic writes, and float formatting."""

import numpy as np
import pytest

from dgmm.cell2d import Field2D, default_cell_grid
from dgmm.curves import segment_curve
from dgmm.errors import InputError
from dgmm.io import (
    atomic_write,
    config_hash,
    curve_from_csv,
    curve_to_csv,
    dump_field,
    fmt,
    load_field,
    profile_to_csv,
    rows_to_csv,
)


def test_fmt_round_trips_floats():
    for x in (0.1, 1.0 / 3.0, 1e-17, -2.5e300, 0.0):
        assert float(fmt(x)) == x
    assert fmt(np.float64(0.1)) == fmt(0.1)
    assert fmt(3) == "3"
    assert fmt(True) == "true"


def test_atomic_write_creates_parents_and_replaces(tmp_path):
    p = tmp_path / "a" / "b.txt"
    atomic_write(p, "one")
    atomic_write(p, "two")
    assert p.read_text() == "two"
    # no stray temporary files left behind
    assert list(p.parent.iterdir()) == [p]


def test_config_hash_is_order_independent():
    h1 = config_hash({"a": 1, "b": [1, 2]})
    h2 = config_hash({"b": [1, 2], "a": 1})
    assert h1 == h2
    assert len(h1) == 16
    assert config_hash({"a": 2}) != h1


def test_curve_csv_round_trip():
    c = segment_curve(np.eye(2), -np.eye(2), n=17)
    text = curve_to_csv(c)
    c2 = curve_from_csv(text)
    assert np.array_equal(c.params, c2.params)
    assert np.array_equal(c.values, c2.values)


def test_curve_csv_rejects_malformed_input():
    with pytest.raises(InputError):
        curve_from_csv("x,y\n1,2\n")
    with pytest.raises(InputError):
        curve_from_csv("s,M11,M12,M21,M22\n1,2,3\n")


def test_rows_and_profile_csv_shape():
    text = profile_to_csv(np.array([0.0, 1.0]), np.array([[1.0, 2.0],
                                                          [3.0, 4.0]]))
    lines = text.splitlines()
    assert lines[0] == "s,g1,g2"
    assert len(lines) == 3
    assert rows_to_csv(("a",), [("x",)]) == "a\nx\n"


def test_field_dump_round_trip(tmp_path):
    x1, x2 = default_cell_grid(32)
    rng = np.random.default_rng(0)
    u = Field2D(x1=x1, x2=x2, values=rng.normal(size=(32, 33, 2)),
                periodic_x1=True)
    path = tmp_path / "field.csv"
    dump_field(u, path, meta={"note": "test"})
    v = load_field(path)
    assert v.periodic_x1
    assert np.allclose(u.x1, v.x1)
    assert np.allclose(u.x2, v.x2)
    assert np.array_equal(u.values, v.values)
