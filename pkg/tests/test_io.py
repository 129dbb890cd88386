import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lvtensor.errors import ArgumentError, Dtf1Error
from lvtensor.io import format_value, parse_config, read_csv, read_dtf1, write_csv, write_dtf1


@settings(max_examples=30, deadline=None)
@given(dims=st.lists(st.integers(1, 4), min_size=1, max_size=4), seed=st.integers(0, 2**31))
def test_dtf1_roundtrip_bit_exact(tmp_path_factory, dims, seed):
    t = np.random.default_rng(seed).standard_normal(dims) * 1e3
    path = tmp_path_factory.mktemp("d") / "t.dtf1"
    write_dtf1(t, path)
    back = read_dtf1(path)
    assert back.shape == tuple(dims)
    assert back.tobytes() == t.tobytes()


def test_dtf1_layout(tmp_path):
    path = tmp_path / "t.dtf1"
    write_dtf1(np.arange(6.0).reshape(2, 3), path)
    raw = path.read_bytes()
    assert raw[:4] == b"DTF1"
    assert struct.unpack("<I2Q", raw[4:24]) == (2, 2, 3)
    assert struct.unpack("<6d", raw[24:]) == (0, 1, 2, 3, 4, 5)


def _header(dims):
    return b"DTF1" + struct.pack("<I", len(dims)) + struct.pack(f"<{len(dims)}Q", *dims)


def test_rejects_wrong_magic(tmp_path):
    path = tmp_path / "t.dtf1"
    path.write_bytes(b"DTF0" + _header((1,))[4:] + struct.pack("<d", 1.0))
    with pytest.raises(Dtf1Error) as exc:
        read_dtf1(path)
    assert exc.value.offset == 0


def test_rejects_zero_extent(tmp_path):
    path = tmp_path / "t.dtf1"
    path.write_bytes(_header((3, 0)))
    with pytest.raises(Dtf1Error) as exc:
        read_dtf1(path)
    assert exc.value.offset == 16


def test_rejects_truncated_payload(tmp_path):
    path = tmp_path / "t.dtf1"
    path.write_bytes(_header((2, 2)) + struct.pack("<3d", 1, 2, 3))
    with pytest.raises(Dtf1Error) as exc:
        read_dtf1(path)
    assert exc.value.offset == 24 + 24
    assert "byte offset" in str(exc.value)


def test_rejects_trailing_bytes_and_short_header(tmp_path):
    path = tmp_path / "t.dtf1"
    path.write_bytes(_header((1,)) + struct.pack("<2d", 1, 2))
    with pytest.raises(Dtf1Error):
        read_dtf1(path)
    path.write_bytes(b"DTF")
    with pytest.raises(Dtf1Error):
        read_dtf1(path)


def test_rejects_nan(tmp_path):
    path = tmp_path / "t.dtf1"
    path.write_bytes(_header((3,)) + struct.pack("<3d", 1.0, math.nan, 2.0))
    with pytest.raises(Dtf1Error) as exc:
        read_dtf1(path)
    assert exc.value.offset == 16 + 8


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_dtf1(tmp_path / "nope.dtf1")


def test_csv_float_roundtrip(tmp_path):
    path = tmp_path / "x.csv"
    values = [1 / 3, 0.1, 1e-300, -2.5e17, 123456789.123456789]
    write_csv([{"v": v, "i": i} for i, v in enumerate(values)], ["i", "v"], path)
    rows = read_csv(path)
    assert [float(r["v"]) for r in rows] == values
    assert path.read_bytes().count(b"\r") == 0
    assert format_value(1 / 3) == "0.33333333333333331"


def test_csv_empty_and_missing_columns(tmp_path):
    path = tmp_path / "x.csv"
    write_csv([], ["a", "b"], path)
    assert path.read_text() == "a,b\n"
    with pytest.raises(ArgumentError):
        write_csv([{"a": 1}], ["a", "b"], path)


def test_format_value():
    assert format_value((3, 3, 3)) == "3 3 3"
    assert format_value(True) == "true"
    assert format_value(np.int64(4)) == "4"
    assert format_value("NA") == "NA"


def test_parse_config():
    cfg = parse_config("""
    # comment
    d = 20,40, 60
    seed = 3   # trailing comment
    epsilon = 0.01
    model = model1
    """)
    assert cfg == {"d": [20, 40, 60], "seed": 3, "epsilon": 0.01, "model": "model1"}
    with pytest.raises(ArgumentError):
        parse_config("no equals sign")
    with pytest.raises(ArgumentError):
        parse_config("= 3")
