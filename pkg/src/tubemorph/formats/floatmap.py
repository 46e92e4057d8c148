"""
GMF1 probability map codec.

Layout: b"GMF1", height and width as little-endian uint32, then
height * width little-endian float32 values in row-major order.
"""

import struct

import numpy as np

from ..errors import FormatError
from ..schema import Raster

GMF_MAGIC = b"GMF1"
_HEADER = struct.Struct("<4sII")


def read_float_map(data: bytes) -> Raster:
    if len(data) < _HEADER.size:
        raise FormatError(f"file of {len(data)} bytes is shorter than the header", field="header")
    magic, height, width = _HEADER.unpack_from(data)
    if magic != GMF_MAGIC:
        raise FormatError(f"bad magic {magic!r}", field="magic")
    if height < 1 or width < 1:
        raise FormatError(f"dimensions must be positive, got {height}x{width}", field="dimensions")

    expected = height * width * 4
    payload = data[_HEADER.size :]
    if len(payload) < expected:
        raise FormatError(
            f"truncated payload: declared {expected} bytes, got {len(payload)}", field="payload"
        )
    if len(payload) > expected:
        raise FormatError(f"{len(payload) - expected} trailing bytes", field="payload")

    values = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    bad = np.flatnonzero(~np.isfinite(values) | (values < 0.0) | (values > 1.0))
    if bad.size:
        index = int(bad[0])
        raise FormatError(
            f"value {values[index]} at index {index} is outside [0, 1]", field="payload"
        )
    return Raster.probability(values.reshape(height, width))


def write_float_map(raster: Raster) -> bytes:
    values = np.ascontiguousarray(raster.values, dtype="<f4")
    return _HEADER.pack(GMF_MAGIC, raster.height, raster.width) + values.tobytes()
