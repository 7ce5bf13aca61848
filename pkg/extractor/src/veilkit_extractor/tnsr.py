"""Minimal writer for the TNSR interchange container.

Layout: magic "TNSR", version byte (1), dtype code byte (0 = float32,
1 = uint8), ndim byte, ndim little-endian uint32 dims, then the payload
in C order, little-endian.  The consuming engine ships the full
reader; this side only ever emits float32 tensors.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import ExtractorError

MAGIC = b"TNSR"
VERSION = 1
F32_CODE = 0


def write_f32(path, values):
    """Serialize a float32 array; parent directories must exist."""
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim < 1 or arr.ndim > 255:
        raise ExtractorError(f"tensor rank {arr.ndim} not supported")
    if not np.isfinite(arr).all():
        raise ExtractorError(f"refusing to write non-finite values to {path}")
    header = MAGIC + bytes([VERSION, F32_CODE, arr.ndim])
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    Path(path).write_bytes(header + dims + arr.tobytes())


def probe(path):
    """Read back (dtype_code, shape) from a TNSR header."""
    with open(path, "rb") as fh:
        head = fh.read(7)
        if len(head) < 7 or head[:4] != MAGIC:
            raise ExtractorError(f"{path} is not a TNSR file")
        version, code, ndim = head[4], head[5], head[6]
        if version != VERSION:
            raise ExtractorError(f"{path}: unsupported version {version}")
        raw = fh.read(4 * ndim)
        if len(raw) < 4 * ndim:
            raise ExtractorError(f"{path}: truncated header")
        return code, struct.unpack(f"<{ndim}I", raw)
