"""PLY (ascii / binary little-endian) and flat CSV point cloud I/O.

On disk coordinates are float32 and colors are uchar; in memory both are
float64 (colors unit-range).  Color bytes are written as round(c*255) with
halves away from zero and read back as v/255, so color round-trips are
bit-exact.  The reader accepts any vertex property order and skips
properties it does not know.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import PlyFormatError, PointCloud

_PLY_SCALARS = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}

_COLOR_NAMES = ("red", "green", "blue")
_NORMAL_NAMES = ("nx", "ny", "nz")

CSV_HEADER = "x,y,z,r,g,b"


@dataclass(frozen=True)
class PlyHeader:
    """Parsed header of the vertex element.

    ``properties`` preserves file order as (name, ply-type) pairs; list
    properties are rejected before a header is built.
    """

    format: str
    vertex_count: int
    properties: tuple


@dataclass
class _Element:
    name: str
    count: int
    properties: list  # (name, ply_type)
    has_list: bool = False


def _parse_header(raw: bytes):
    """Split file bytes into (format, elements, payload)."""
    end = raw.find(b"end_header")
    if end < 0:
        raise PlyFormatError("no end_header in file")
    nl = raw.find(b"\n", end)
    if nl < 0:
        raise PlyFormatError("end_header line not terminated")
    header_text = raw[:nl].decode("ascii", errors="replace")
    payload = raw[nl + 1:]

    lines = [ln.strip() for ln in header_text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != "ply":
        raise PlyFormatError("missing ply magic line")

    fmt: Optional[str] = None
    elements: list[_Element] = []
    for ln in lines[1:]:
        parts = ln.split()
        kw = parts[0]
        if kw == "format":
            if len(parts) < 2:
                raise PlyFormatError("malformed format line")
            fmt = parts[1]
            if fmt not in ("ascii", "binary_little_endian"):
                raise PlyFormatError(f"unsupported format {fmt!r}")
        elif kw in ("comment", "obj_info"):
            continue
        elif kw == "element":
            if len(parts) != 3:
                raise PlyFormatError(f"malformed element line: {ln!r}")
            try:
                count = int(parts[2])
            except ValueError:
                raise PlyFormatError(f"bad element count: {ln!r}") from None
            if count < 0:
                raise PlyFormatError(f"negative element count: {ln!r}")
            elements.append(_Element(parts[1], count, []))
        elif kw == "property":
            if not elements:
                raise PlyFormatError("property before any element")
            if len(parts) >= 2 and parts[1] == "list":
                elements[-1].has_list = True
                elements[-1].properties.append((parts[-1], "list"))
            elif len(parts) == 3:
                elements[-1].properties.append((parts[2], parts[1]))
            else:
                raise PlyFormatError(f"malformed property line: {ln!r}")
        elif kw == "end_header":
            break
        else:
            raise PlyFormatError(f"unrecognized header line: {ln!r}")

    if fmt is None:
        raise PlyFormatError("header missing format line")
    return fmt, elements, payload


def _vertex_dtype(elem: _Element) -> np.dtype:
    fields = []
    for i, (name, ply_type) in enumerate(elem.properties):
        code = _PLY_SCALARS.get(ply_type)
        if code is None:
            raise PlyFormatError(f"unsupported scalar type {ply_type!r}")
        # field names only need to be unique; duplicates in the file keep
        # their first occurrence for lookup
        fields.append((f"f{i}", "<" + code))
    return np.dtype(fields)


def _column(rec: np.ndarray, elem: _Element, prop: str) -> Optional[np.ndarray]:
    for i, (name, _) in enumerate(elem.properties):
        if name == prop:
            return rec[f"f{i}"]
    return None


def _prop_type(elem: _Element, prop: str) -> Optional[str]:
    for name, ply_type in elem.properties:
        if name == prop:
            return ply_type
    return None


def read_ply(path) -> PointCloud:
    """Read an ascii or binary_little_endian PLY file.

    Files without a red/green/blue uchar trio load with zero colors and the
    cloud's ``colorless`` flag set.  A nx/ny/nz trio is read as normals and
    renormalized to unit length.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    fmt, elements, payload = _parse_header(raw)

    vertex = None
    preceding: list[_Element] = []
    for elem in elements:
        if elem.name == "vertex":
            vertex = elem
            break
        preceding.append(elem)
    if vertex is None:
        raise PlyFormatError("no vertex element declared")
    if vertex.has_list:
        raise PlyFormatError("list property inside vertex element")

    dtype = _vertex_dtype(vertex)

    if fmt == "binary_little_endian":
        offset = 0
        for elem in preceding:
            if elem.count == 0:
                continue
            if elem.has_list:
                raise PlyFormatError(
                    f"cannot skip binary element {elem.name!r} with list property")
            offset += elem.count * _vertex_dtype(elem).itemsize
        need = offset + vertex.count * dtype.itemsize
        if len(payload) < need:
            raise PlyFormatError(
                f"truncated payload: need {need} bytes, have {len(payload)}")
        rec = np.frombuffer(payload, dtype=dtype, count=vertex.count, offset=offset)
    else:
        tokens = payload.decode("ascii", errors="replace").split()
        pos = 0
        for elem in preceding:
            if elem.has_list:
                # list length prefixes make the stride data-dependent
                for _ in range(elem.count):
                    for _, ply_type in elem.properties:
                        if ply_type == "list":
                            if pos >= len(tokens):
                                raise PlyFormatError("truncated payload")
                            n = int(tokens[pos])
                            pos += 1 + n
                        else:
                            pos += 1
            else:
                pos += elem.count * len(elem.properties)
        width = len(vertex.properties)
        need = pos + vertex.count * width
        if len(tokens) < need:
            raise PlyFormatError(
                f"truncated payload: need {need} values, have {len(tokens)}")
        block = tokens[pos:need]
        rec = np.zeros(vertex.count, dtype=dtype)
        try:
            flat = np.array(block, dtype=np.float64).reshape(vertex.count, width)
        except ValueError:
            raise PlyFormatError("non-numeric vertex data") from None
        for i in range(width):
            rec[f"f{i}"] = flat[:, i]

    cols = {}
    for axis in ("x", "y", "z"):
        col = _column(rec, vertex, axis)
        if col is None:
            raise PlyFormatError(f"vertex element missing property {axis!r}")
        cols[axis] = col.astype(np.float64)
    positions = np.column_stack([cols["x"], cols["y"], cols["z"]])

    colors = None
    colorless = True
    if all(_prop_type(vertex, n) is not None for n in _COLOR_NAMES):
        for n in _COLOR_NAMES:
            if _PLY_SCALARS.get(_prop_type(vertex, n)) != "u1":
                raise PlyFormatError(f"color property {n!r} must be uchar")
        colors = np.column_stack(
            [_column(rec, vertex, n).astype(np.float64) for n in _COLOR_NAMES]) / 255.0
        colorless = False

    normals = None
    if all(_prop_type(vertex, n) is not None for n in _NORMAL_NAMES):
        normals = np.column_stack(
            [_column(rec, vertex, n).astype(np.float64) for n in _NORMAL_NAMES])
        norms = np.linalg.norm(normals, axis=1)
        if normals.shape[0]:
            if norms.min() < 1e-12:
                raise PlyFormatError("zero-length normal in file")
            normals = normals / norms[:, None]

    return PointCloud(positions, colors, normals, colorless=colorless)


def write_ply(cloud: PointCloud, path, format: str = "binary_little_endian",
              allow_empty: bool = False) -> None:
    """Write a cloud as PLY; colors omitted entirely for colorless clouds."""
    if format not in ("ascii", "binary_little_endian"):
        raise ValueError(f"unsupported format {format!r}")
    if len(cloud) == 0 and not allow_empty:
        raise ValueError("refusing to write empty cloud (pass allow_empty=True)")

    with_color = not cloud.colorless
    with_normals = cloud.normals is not None

    header = ["ply", f"format {format} 1.0", f"element vertex {len(cloud)}"]
    header += [f"property float {a}" for a in ("x", "y", "z")]
    if with_normals:
        header += [f"property float {n}" for n in _NORMAL_NAMES]
    if with_color:
        header += [f"property uchar {n}" for n in _COLOR_NAMES]
    header.append("end_header")

    pos32 = cloud.positions.astype(np.float32)
    nrm32 = cloud.normals.astype(np.float32) if with_normals else None
    col8 = None
    if with_color:
        col8 = np.floor(cloud.colors * 255.0 + 0.5).astype(np.uint8)

    if format == "binary_little_endian":
        fields = [(a, "<f4") for a in ("x", "y", "z")]
        if with_normals:
            fields += [(n, "<f4") for n in _NORMAL_NAMES]
        if with_color:
            fields += [(n, "u1") for n in _COLOR_NAMES]
        rec = np.zeros(len(cloud), dtype=np.dtype(fields))
        for i, a in enumerate(("x", "y", "z")):
            rec[a] = pos32[:, i]
        if with_normals:
            for i, n in enumerate(_NORMAL_NAMES):
                rec[n] = nrm32[:, i]
        if with_color:
            for i, n in enumerate(_COLOR_NAMES):
                rec[n] = col8[:, i]
        body = rec.tobytes()
        data = ("\n".join(header) + "\n").encode("ascii") + body
    else:
        lines = []
        for i in range(len(cloud)):
            parts = [str(v) for v in pos32[i]]
            if with_normals:
                parts += [str(v) for v in nrm32[i]]
            if with_color:
                parts += [str(int(v)) for v in col8[i]]
            lines.append(" ".join(parts))
        data = ("\n".join(header + lines) + "\n").encode("ascii")

    with open(path, "wb") as fh:
        fh.write(data)


def write_csv(cloud: PointCloud, path) -> None:
    """Debug format: header x,y,z,r,g,b then one full-precision row per point."""
    lines = [CSV_HEADER]
    for i in range(len(cloud)):
        p = cloud.positions[i]
        c = cloud.colors[i]
        lines.append(",".join(repr(float(v)) for v in (*p, *c)))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> PointCloud:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise PlyFormatError(f"bad CSV header, expected {CSV_HEADER!r}")
    if len(lines) == 1:
        return PointCloud(np.zeros((0, 3)), np.zeros((0, 3)))
    try:
        rows = np.array([ln.split(",") for ln in lines[1:]], dtype=np.float64)
    except ValueError:
        raise PlyFormatError("non-numeric CSV row") from None
    if rows.shape[1] != 6:
        raise PlyFormatError(f"expected 6 CSV columns, got {rows.shape[1]}")
    return PointCloud(rows[:, :3], rows[:, 3:])
