"""Field containers, CSV exports and report files.

Binary field layout (all header integers little-endian)::

    magic    4 bytes  b"NLSF"
    version  uint32   1
    endian   1 byte   b"<" or b">" (byte order of the payload)
    pad      3 bytes
    n        uint64   number of samples
    L        float64  half-width, payload byte order
    payload  2n float64, interleaved (re, im), payload byte order
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .grid import ComplexField, GridSpec, NormTimeSeries
from .report import jsonable

__all__ = [
    "write_field",
    "read_field",
    "write_field_csv",
    "read_field_csv",
    "write_norm_series_csv",
    "read_norm_series_csv",
    "write_table_csv",
    "write_json",
    "write_records",
    "export_trajectory",
    "FieldFormatError",
]

MAGIC = b"NLSF"
VERSION = 1
_HEAD = struct.Struct("<4sIc3xQ")

PathLike = Union[str, Path]


class FieldFormatError(ValueError):
    pass


def write_field(path: PathLike, f: ComplexField, byteorder: str = "<") -> None:
    """Write ``f`` to the binary container (payload in ``byteorder``)."""
    if byteorder not in "<>":
        raise ValueError("byteorder must be '<' or '>'")
    n = f.grid.n_points
    payload = np.empty(2 * n, dtype=np.dtype(byteorder + "f8"))
    payload[0::2] = f.values.real
    payload[1::2] = f.values.imag
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, byteorder.encode(), n))
        fh.write(struct.pack(byteorder + "d", f.grid.half_width))
        fh.write(payload.tobytes())


def read_field(path: PathLike) -> ComplexField:
    data = Path(path).read_bytes()
    if len(data) < _HEAD.size + 8:
        raise FieldFormatError("file too short for a field header")
    magic, version, endian, n = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"unsupported version {version}")
    bo = endian.decode()
    if bo not in "<>":
        raise FieldFormatError(f"bad endianness tag {endian!r}")
    (L,) = struct.unpack_from(bo + "d", data, _HEAD.size)
    off = _HEAD.size + 8
    if len(data) - off != 16 * n:
        raise FieldFormatError(f"payload holds {len(data) - off} bytes, expected {16 * n}")
    raw = np.frombuffer(data, dtype=np.dtype(bo + "f8"), offset=off).astype(np.float64)
    return ComplexField(GridSpec(int(n), float(L)), raw[0::2] + 1j * raw[1::2])


def write_field_csv(path: PathLike, f: ComplexField) -> None:
    """CSV with header ``x,re,im``."""
    x = f.grid.x
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "re", "im"])
        for xi, v in zip(x, f.values):
            w.writerow([repr(float(xi)), repr(float(v.real)), repr(float(v.imag))])


def read_field_csv(path: PathLike) -> ComplexField:
    """Inverse of :func:`write_field_csv`; the grid is recovered from the x column."""
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = arr[:, 0]
    n = len(x)
    L = -float(x[0])
    return ComplexField(GridSpec(n, L), arr[:, 1] + 1j * arr[:, 2])


def write_norm_series_csv(path: PathLike, s: NormTimeSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "norm"])
        for t, v in zip(s.times, s.norms):
            w.writerow([repr(float(t)), repr(float(v))])


def read_norm_series_csv(path: PathLike, r) -> NormTimeSeries:
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return NormTimeSeries(arr[:, 0], r, arr[:, 1])


def write_table_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    """Generic numeric CSV (floats written with ``repr`` so they round-trip)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(columns))
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def write_json(path: PathLike, obj) -> None:
    with open(path, "w") as fh:
        json.dump(jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_records(directory: PathLike, grid: GridSpec, times, values, prefix: str = "u", stride: int = 1) -> list:
    """One field container per kept record, ``{prefix}_{j:05d}.bin``, plus ``{prefix}_times.csv``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    keep = list(range(0, len(times), max(1, int(stride))))
    if keep[-1] != len(times) - 1:
        keep.append(len(times) - 1)
    names = []
    for j in keep:
        name = f"{prefix}_{j:05d}.bin"
        write_field(d / name, ComplexField(grid, values[j]))
        names.append(name)
    write_table_csv(d / f"{prefix}_times.csv", ["record", "t"], [(j, times[j]) for j in keep])
    return names


def export_trajectory(directory: PathLike, traj, p_dual, stride: int = 1) -> None:
    """Per-record field containers and ``diagnostics.csv`` (t, mass, leakage, L^{p'} norm)."""
    d = Path(directory)
    write_records(d, traj.grid, traj.times, traj.values, "u", stride)
    norms = traj.norms(p_dual)
    write_table_csv(d / "diagnostics.csv", ["t", "mass", "leakage", "lp_dual_norm"], zip(traj.times, traj.mass, traj.leakage, norms))
