import json
import math
import struct
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlslab.data import gaussian
from nlslab.grid import ComplexField, GridSpec, NormTimeSeries
from nlslab.integrator import IntegratorConfig, evolve
from nlslab.io import (
    FieldFormatError,
    export_trajectory,
    read_field,
    read_field_csv,
    read_norm_series_csv,
    write_field,
    write_field_csv,
    write_json,
    write_norm_series_csv,
    write_records,
    write_table_csv,
)
from nlslab.nonlinearity import NonlinearitySpec
from nlslab.report import config_hash, fit_loglog, jsonable, make_report

G = GridSpec(64, 3.0)


def _field(seed=0):
    rng = np.random.default_rng(seed)
    return ComplexField(G, rng.standard_normal(64) + 1j * rng.standard_normal(64))


@pytest.mark.parametrize("order", ["<", ">"])
def test_binary_round_trip(tmp_path, order):
    f = _field()
    path = tmp_path / "f.bin"
    write_field(path, f, order)
    g = read_field(path)
    assert g.grid == f.grid
    assert np.array_equal(g.values, f.values)
    raw = path.read_bytes()
    assert raw[:4] == b"NLSF" and raw[8:9] == order.encode()
    assert len(raw) == 20 + 8 + 16 * 64


def test_binary_layout_is_interleaved(tmp_path):
    f = ComplexField(GridSpec(2, 1.0), [1 + 2j, 3 + 4j])
    path = tmp_path / "f.bin"
    write_field(path, f, ">")
    raw = path.read_bytes()
    assert struct.unpack(">d", raw[20:28]) == (1.0,)
    assert struct.unpack(">4d", raw[28:]) == (1.0, 2.0, 3.0, 4.0)


def test_binary_rejects_corruption(tmp_path):
    path = tmp_path / "f.bin"
    write_field(path, _field())
    raw = bytearray(path.read_bytes())
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + bytes(raw[4:]))
    with pytest.raises(FieldFormatError, match="magic"):
        read_field(bad)
    bad.write_bytes(bytes(raw[:4]) + struct.pack("<I", 9) + bytes(raw[8:]))
    with pytest.raises(FieldFormatError, match="version"):
        read_field(bad)
    bad.write_bytes(bytes(raw[:8]) + b"?" + bytes(raw[9:]))
    with pytest.raises(FieldFormatError, match="endianness"):
        read_field(bad)
    bad.write_bytes(bytes(raw[:-8]))
    with pytest.raises(FieldFormatError, match="payload"):
        read_field(bad)
    bad.write_bytes(b"NLSF")
    with pytest.raises(FieldFormatError, match="short"):
        read_field(bad)
    with pytest.raises(ValueError):
        write_field(path, _field(), "=")


@given(st.integers(0, 2**32 - 1))
def test_csv_field_round_trip(tmp_path_factory, seed):
    path = tmp_path_factory.mktemp("csv") / "f.csv"
    f = _field(seed)
    write_field_csv(path, f)
    g = read_field_csv(path)
    assert g.grid == f.grid
    assert np.array_equal(g.values, f.values)
    assert path.read_text().splitlines()[0] == "x,re,im"


def test_norm_series_csv_round_trip(tmp_path):
    s = NormTimeSeries([0.0, 0.1, 0.3], Fraction(7, 4), [1.0, 0.5, 1 / 3])
    path = tmp_path / "n.csv"
    write_norm_series_csv(path, s)
    back = read_norm_series_csv(path, Fraction(7, 4))
    assert np.array_equal(back.times, s.times) and np.array_equal(back.norms, s.norms)
    assert path.read_text().splitlines()[0] == "t,norm"


def test_table_and_json_writers(tmp_path):
    write_table_csv(tmp_path / "t.csv", ["a", "b"], [(1, 0.1), (2, 1 / 3)])
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert rows[0] == "a,b" and float(rows[2].split(",")[1]) == 1 / 3
    write_json(tmp_path / "r.json", {"x": Fraction(1, 3), "y": np.arange(2)})
    assert json.loads((tmp_path / "r.json").read_text()) == {"x": "1/3", "y": [0, 1]}


def test_records_and_trajectory_export(tmp_path):
    tr = evolve(gaussian(GridSpec(256, 16.0)), NonlinearitySpec("gauge", 3, 1.0), IntegratorConfig(0.01, 0.1))
    names = write_records(tmp_path / "rec", tr.grid, tr.times, tr.values, "u", stride=4)
    assert names == ["u_00000.bin", "u_00004.bin", "u_00008.bin", "u_00010.bin"]
    assert np.array_equal(read_field(tmp_path / "rec" / "u_00008.bin").values, tr.values[8])
    export_trajectory(tmp_path / "traj", tr, 4, stride=5)
    diag = np.loadtxt(tmp_path / "traj" / "diagnostics.csv", delimiter=",", skiprows=1)
    assert diag.shape == (11, 4)
    assert np.allclose(diag[:, 1], tr.mass) and np.allclose(diag[:, 3], tr.norms(4))


def test_jsonable_conversions():
    out = jsonable({"f": Fraction(3, 2), "n": np.float64(0.5), "i": np.int64(3), "b": np.bool_(True), "inf": math.inf, "t": (1, 2)})
    assert out == {"f": "3/2", "n": 0.5, "i": 3, "b": True, "inf": "inf", "t": [1, 2]}
    json.dumps(out)


def test_config_hash_is_canonical():
    a = {"x": 1, "y": {"b": 2, "a": 1}}
    b = {"y": {"a": 1, "b": 2}, "x": 1}
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({"x": 2, "y": {"a": 1, "b": 2}})
    assert len(config_hash(a)) == 64


def test_fit_loglog_recovers_power():
    x = np.geomspace(1, 100, 10)
    slope, icpt, rms = fit_loglog(x, 3 * x**-0.75)
    assert slope == pytest.approx(-0.75) and icpt == pytest.approx(math.log(3)) and rms < 1e-12


def test_make_report_pass_logic():
    ok = make_report("e", "t", {"s": 1.01}, {"s": 1.0}, {"s": 0.02})
    assert ok.passed and ok.rel_errors["s"] == pytest.approx(0.01)
    assert not make_report("e", "t", {"s": 1.05}, {"s": 1.0}, {"s": 0.02}).passed
    assert not make_report("e", "t", {"s": 1.0}, {"s": 1.0}, {"s": 0.02}, checks={"c": False}).passed
    assert not make_report("e", "t", {"s": math.nan}, {"s": 1.0}, {"s": 0.02}).passed
    zero = make_report("e", "t", {"d": 1e-13}, {"d": 0}, {"d": 1e-12})
    assert zero.passed and zero.rel_errors["d"] == 1e-13
    # a target without tolerance is informational
    assert make_report("e", "t", {"s": 9.0}, {"s": 1.0}, {}).passed


def test_report_json_and_stamp():
    r = make_report("e", "t", {"s": Fraction(1, 2)}, {"s": Fraction(1, 2)}, {"s": 0.1}, outside_proven_range=True, artifacts={"big": np.zeros(3)})
    d = r.to_json()
    assert d["stamp"] == "outside proven range"
    assert "artifacts" not in d and "big" not in json.dumps(d)
    assert d["provenance"]["code_version"]
    assert "stamp" not in make_report("e", "t", {}, {}, {}).to_json()
