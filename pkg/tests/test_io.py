import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from needlecast import io
from needlecast.core import DepthMap, GrayImage, NeedleMap
from needlecast.errors import DimensionMismatch, MalformedHeader, NonFiniteValue, TruncatedData
from needlecast.exemplars import ExemplarDb, SamplingMode


def test_pgm_p2_with_comments(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P2\n# made by hand\n3 2\n# max\n255\n0 128 255\n# mid\n1 2 3\n")
    raw, maxval = io.read_pgm_raw(p)
    np.testing.assert_array_equal(raw, [[0, 128, 255], [1, 2, 3]])
    img = io.read_pgm(p)
    assert img.intensities[0, 2] == 1.0


def test_pgm_p5_8_and_16_bit(tmp_path):
    p = tmp_path / "b.pgm"
    p.write_bytes(b"P5 2 2 255\n" + bytes([0, 10, 200, 255]))
    np.testing.assert_array_equal(io.read_pgm_raw(p)[0], [[0, 10], [200, 255]])
    p.write_bytes(b"P5\n2 1\n65535\n" + bytes([0x01, 0x00, 0xFF, 0xFF]))
    raw, maxval = io.read_pgm_raw(p)
    np.testing.assert_array_equal(raw, [[256, 65535]])
    assert maxval == 65535


def test_pgm_errors(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P6\n1 1\n255\n\0\0\0")
    with pytest.raises(MalformedHeader):
        io.read_pgm(p)
    p.write_bytes(b"P2\n2 2\n255\n1 2 3\n")
    with pytest.raises(TruncatedData):
        io.read_pgm(p)
    p.write_bytes(b"P5\n2 2\n255\n\0\0")
    with pytest.raises(TruncatedData):
        io.read_pgm(p)
    p.write_bytes(b"P2\n1 1\n10\n11\n")
    with pytest.raises(MalformedHeader):
        io.read_pgm(p)
    p.write_bytes(b"P2\nx 1\n10\n1\n")
    with pytest.raises(MalformedHeader):
        io.read_pgm(p)


def test_write_pgm_rounds_half_up(tmp_path):
    p = tmp_path / "d.pgm"
    io.write_pgm(p, GrayImage(np.array([[0.5 / 255, 0.0, 1.0]])))
    assert p.read_text() == "P2\n3 1\n255\n1 0 255\n"


def test_depth_format(tmp_path):
    d = DepthMap(np.array([[0.1, -2.0], [3.0, 1e-300]]), spacing=0.25)
    p = tmp_path / "z.depth"
    io.write_depth(p, d)
    assert p.read_text().splitlines()[0] == "2 2 0.25"
    back = io.read_depth(p)
    np.testing.assert_array_equal(back.z, d.z)
    assert back.spacing == 0.25


def test_depth_errors():
    with pytest.raises(DimensionMismatch):
        io.parse_depth("3 1 1.0\n1 2\n")
    with pytest.raises(DimensionMismatch):
        io.parse_depth("1 2 1.0\n1\n")
    with pytest.raises(NonFiniteValue):
        io.parse_depth("1 1 1.0\nnan\n")
    with pytest.raises(MalformedHeader):
        io.parse_depth("one 1 1.0\n0\n")


def test_db_format_header():
    db = ExemplarDb(np.arange(14, dtype=float).reshape(2, 7) / 20, [0.1, -0.2], ["f1", "silt"])
    text = io.format_db(db)
    assert text.splitlines()[0] == "needlecast-db v1 mode=overlapping n=2"
    assert text.splitlines()[1] == "sources=f1,silt"
    assert io.parse_db(text) == db


def test_db_errors():
    with pytest.raises(MalformedHeader):
        io.parse_db("garbage\n")
    with pytest.raises(DimensionMismatch):
        io.parse_db("needlecast-db v1 mode=overlapping n=1\nsources=\n1,2,3\n")
    with pytest.raises(TruncatedData):
        io.parse_db("needlecast-db v1 mode=overlapping n=2\nsources=\n" + ",".join(["0"] * 8) + "\n")


def test_needle_map_keeps_boundary_flags():
    nm = NeedleMap.empty(3, 4)
    nm.slant[0, :] = 0.5
    nm.tilt[0, :] = 0.25
    nm.distance[0, :] = 0.0
    nm.boundary[0, :] = True
    nm.slant[1, 1], nm.tilt[1, 1], nm.distance[1, 1] = -1.0, 1.0, 0.125
    text = io.format_needle_map(nm)
    assert "# boundary 0:0-3" in text
    assert io.parse_needle_map(text) == nm


def test_needle_map_errors():
    with pytest.raises(MalformedHeader):
        io.parse_needle_map("nm\n")
    with pytest.raises(DimensionMismatch):
        io.parse_needle_map("needlecast-nm v1 w=2 h=2\n5,0,0,0,0\n")
    with pytest.raises(NonFiniteValue):
        io.parse_needle_map("needlecast-nm v1 w=2 h=2\n0,0,inf,0,0\n")


def test_visualization_is_triptych(tmp_path):
    nm = NeedleMap.empty(4, 5)
    nm.slant[:] = 0.0
    nm.tilt[:] = math.pi / 4
    nm.distance[:] = 0.5
    p = tmp_path / "v.pgm"
    io.render_needle_visualization(nm, p)
    raw, _ = io.read_pgm_raw(p)
    assert raw.shape == (4, 15)
    assert set(np.unique(raw)) == {128}


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50)
@given(st.lists(st.lists(finite, min_size=3, max_size=3), min_size=1, max_size=4),
       st.floats(1e-6, 1e6))
def test_depth_round_trip_property(rows, spacing):
    d = DepthMap(np.array(rows), spacing)
    back = io.parse_depth(io.format_depth(d))
    np.testing.assert_array_equal(back.z, d.z)
    assert back.spacing == d.spacing


@settings(max_examples=50)
@given(st.lists(st.tuples(*[st.floats(0, 1)] * 4, *[st.floats(-math.pi, math.pi)] * 4), max_size=10),
       st.sampled_from(list(SamplingMode)))
def test_db_round_trip_property(rows, mode):
    a = np.array(rows, dtype=float).reshape(-1, 8)
    db = ExemplarDb(a[:, :7], a[:, 7], ["x"], mode)
    assert io.parse_db(io.format_db(db)) == db
