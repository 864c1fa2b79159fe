"""Binary grid files.

Three little-endian formats share a 64-byte header:

* ``PXF1`` complex 2D field: u32 nx, u32 ny, f64 dx, f64 dy, then nx*ny
  complex values stored as interleaved f64 (re, im).
* ``PXI1`` real 2D image: same header, f64 values.
* ``PXD1`` real 3D density: u32 nx, ny, nz, f64 dx, dy, dz, then f64 values.

Arrays are indexed ``[ix, iy(, iz)]`` in memory; on disk x runs fastest.
The header is zero-padded to 64 bytes.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

HEADER_SIZE = 64
_HEAD_2D = struct.Struct("<4sIIdd")
_HEAD_3D = struct.Struct("<4sIIIddd")


class GridFormatError(ValueError):
    pass


def atomic_write_bytes(path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _pad(header: bytes) -> bytes:
    return header + b"\0" * (HEADER_SIZE - len(header))


def _encode_2d(magic: bytes, values: np.ndarray, dx: float, dy: float) -> bytes:
    nx, ny = values.shape
    head = _pad(_HEAD_2D.pack(magic, nx, ny, float(dx), float(dy)))
    return head + np.ascontiguousarray(values.T).tobytes()


def _decode_2d(data: bytes, magic: bytes, dtype) -> tuple[np.ndarray, float, float]:
    if len(data) < HEADER_SIZE or data[:4] != magic:
        raise GridFormatError(f"not a {magic.decode()} file")
    _, nx, ny, dx, dy = _HEAD_2D.unpack_from(data)
    body = np.frombuffer(data, dtype=dtype, offset=HEADER_SIZE)
    if body.size != nx * ny:
        raise GridFormatError(f"expected {nx * ny} values, found {body.size}")
    return body.reshape(ny, nx).T.copy(), dx, dy


def write_field(path, values: np.ndarray, dx: float, dy: float, sidecar: dict | None = None) -> None:
    values = np.asarray(values, dtype="<c16")
    atomic_write_bytes(path, _encode_2d(b"PXF1", values, dx, dy))
    if sidecar is not None:
        atomic_write_text(str(path) + ".json", json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def read_field(path) -> tuple[np.ndarray, float, float]:
    return _decode_2d(Path(path).read_bytes(), b"PXF1", "<c16")


def write_image(path, values: np.ndarray, dx: float, dy: float) -> None:
    values = np.asarray(values, dtype="<f8")
    atomic_write_bytes(path, _encode_2d(b"PXI1", values, dx, dy))


def read_image(path) -> tuple[np.ndarray, float, float]:
    return _decode_2d(Path(path).read_bytes(), b"PXI1", "<f8")


def write_density(path, values: np.ndarray, spacing: tuple[float, float, float]) -> None:
    values = np.asarray(values, dtype="<f8")
    nx, ny, nz = values.shape
    head = _pad(_HEAD_3D.pack(b"PXD1", nx, ny, nz, *map(float, spacing)))
    atomic_write_bytes(path, head + np.ascontiguousarray(values.transpose(2, 1, 0)).tobytes())


def read_density(path) -> tuple[np.ndarray, tuple[float, float, float]]:
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE or data[:4] != b"PXD1":
        raise GridFormatError("not a PXD1 file")
    _, nx, ny, nz, dx, dy, dz = _HEAD_3D.unpack_from(data)
    body = np.frombuffer(data, dtype="<f8", offset=HEADER_SIZE)
    if body.size != nx * ny * nz:
        raise GridFormatError(f"expected {nx * ny * nz} values, found {body.size}")
    return body.reshape(nz, ny, nx).transpose(2, 1, 0).copy(), (dx, dy, dz)
