"""Readers and writers for the CIM1 binary and CSV image formats.

CIM1 layout (little endian)::

    b"CIM1" | u32 rows | u32 cols | [u8 kind | u32 k] | rows*cols * (f64 re, f64 im)

The bracketed kind tag is present only in sensing-matrix files; ``k`` only
follows a Bernoulli tag. CSV layout is a ``rows,cols`` header line followed by
one ``row,col,re,im`` line per entry in row-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"CIM1"
_HEADER = struct.Struct("<4sII")
_KIND_TAGS = {"gaussian": 0, "bernoulli": 1, "custom": 2}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}

FORMATS = ("cim", "csv")


def _entries(data):
    return np.ascontiguousarray(data, dtype="<c16").tobytes()


def encode_cim(data, kind=None, k=None) -> bytes:
    data = np.asarray(data, dtype=np.complex128)
    rows, cols = data.shape
    out = bytearray(_HEADER.pack(MAGIC, rows, cols))
    if kind is not None:
        out += struct.pack("<B", _KIND_TAGS[kind])
        if kind == "bernoulli":
            out += struct.pack("<I", int(k))
    out += _entries(data)
    return bytes(out)


def decode_cim(buf: bytes, tagged=None):
    """Decode a CIM1 payload into ``(data, kind, k)``.

    ``tagged=None`` infers the presence of a kind tag from the payload length.
    """
    if len(buf) < _HEADER.size:
        raise FormatError("CIM1 payload shorter than its header")
    magic, rows, cols = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    body = 16 * rows * cols
    extra = len(buf) - _HEADER.size - body
    pos = _HEADER.size
    kind = k = None
    if tagged is None:
        tagged = extra > 0
    if tagged:
        if extra < 1:
            raise FormatError("missing sensing-matrix kind tag")
        tag = buf[pos]
        if tag not in _TAG_KINDS:
            raise FormatError(f"unknown kind tag {tag}")
        kind = _TAG_KINDS[tag]
        pos += 1
        if kind == "bernoulli":
            (k,) = struct.unpack_from("<I", buf, pos)
            pos += 4
    if len(buf) - pos != body:
        raise FormatError(f"expected {body} data bytes for {rows}x{cols}, found {len(buf) - pos}")
    data = np.frombuffer(buf, dtype="<c16", count=rows * cols, offset=pos)
    return data.reshape(rows, cols).astype(np.complex128), kind, k


def encode_csv(data) -> str:
    data = np.asarray(data, dtype=np.complex128)
    rows, cols = data.shape
    lines = [f"{rows},{cols}"]
    for r in range(rows):
        for c in range(cols):
            z = data[r, c]
            lines.append(f"{r},{c},{float(z.real)!r},{float(z.imag)!r}")
    return "\n".join(lines) + "\n"


def decode_csv(text: str):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty CSV image")
    try:
        rows, cols = (int(v) for v in lines[0].split(","))
    except ValueError as exc:
        raise FormatError(f"line 1: expected 'rows,cols' header, got {lines[0]!r}") from exc
    data = np.zeros((rows, cols), dtype=np.complex128)
    seen = np.zeros((rows, cols), dtype=bool)
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 4:
            raise FormatError(f"line {lineno}: expected row,col,re,im")
        try:
            r, c = int(parts[0]), int(parts[1])
            val = complex(float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        if not (0 <= r < rows and 0 <= c < cols):
            raise FormatError(f"line {lineno}: index ({r},{c}) outside {rows}x{cols}")
        data[r, c] = val
        seen[r, c] = True
    if not seen.all():
        raise FormatError(f"CSV image is missing {int((~seen).sum())} entries")
    return data


def detect_format(path) -> str:
    with open(path, "rb") as fh:
        return "cim" if fh.read(4) == MAGIC else "csv"


def write_image(path, data, fmt="cim"):
    path = Path(path)
    if fmt == "cim":
        path.write_bytes(encode_cim(data))
    elif fmt == "csv":
        path.write_text(encode_csv(data))
    else:
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def read_image(path):
    """Read a complex matrix from either format; any sensing tag is ignored."""
    if detect_format(path) == "cim":
        return decode_cim(Path(path).read_bytes())[0]
    return decode_csv(Path(path).read_text())


def write_sensing(path, phi, fmt="cim"):
    path = Path(path)
    if fmt == "cim":
        path.write_bytes(encode_cim(phi.data, kind=phi.kind, k=phi.k))
    else:
        write_image(path, phi.data, fmt)


def read_sensing(path):
    from .acquisition import SensingMatrix

    if detect_format(path) == "cim":
        data, kind, k = decode_cim(Path(path).read_bytes())
    else:
        data, kind, k = decode_csv(Path(path).read_text()), None, None
    return SensingMatrix(data, kind or "custom", k)
