"""Binary PGM (P5, maxval 255) codec for masks."""

import numpy as np

from ..errors import FormatError
from ..schema import Raster

PGM_MAGIC = b"P5"
PGM_MAXVAL = 255
FOREGROUND_CUTOFF = 127  # pixels strictly above are foreground


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """
    Read `count` whitespace-separated header tokens, skipping '#' comments.

    Returns:
        tuple: the tokens and the offset of the single whitespace byte that
        terminates the last token
    """
    tokens = []
    pos = 0
    size = len(data)
    while len(tokens) < count:
        while pos < size and data[pos : pos + 1].isspace():
            pos += 1
        if pos < size and data[pos : pos + 1] == b"#":
            while pos < size and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < size and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            break
        tokens.append(data[start:pos])
    return tokens, pos


def read_binary_pgm(data: bytes) -> Raster:
    """
    Decode a P5 PGM into a binary raster (value > 127 -> 1).

    Raises:
        FormatError: bad magic, dimensions, maxval, or a payload of the wrong length
    """
    tokens, pos = _header_tokens(data, 4)
    names = ("magic", "width", "height", "maxval")
    if len(tokens) < 4:
        raise FormatError("header ends early", field=names[len(tokens)])
    magic, width_token, height_token, maxval_token = tokens
    if magic != PGM_MAGIC:
        raise FormatError(f"expected P5, got {magic[:8]!r}", field="magic")

    values = {}
    for name, token in zip(names[1:], tokens[1:], strict=True):
        try:
            values[name] = int(token)
        except ValueError:
            raise FormatError(f"not an integer: {token[:16]!r}", field=name) from None
    width, height, maxval = values["width"], values["height"], values["maxval"]
    if width < 1:
        raise FormatError(f"must be positive, got {width}", field="width")
    if height < 1:
        raise FormatError(f"must be positive, got {height}", field="height")
    if maxval != PGM_MAXVAL:
        raise FormatError(f"must be {PGM_MAXVAL}, got {maxval}", field="maxval")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError("missing whitespace after header", field="maxval")

    payload = data[pos + 1 :]
    expected = width * height
    if len(payload) < expected:
        raise FormatError(
            f"truncated payload: declared {expected} bytes, got {len(payload)}", field="payload"
        )
    if len(payload) > expected:
        raise FormatError(f"{len(payload) - expected} trailing bytes", field="payload")
    pixels = np.frombuffer(payload[:expected], dtype=np.uint8).reshape(height, width)
    return Raster.binary(pixels > FOREGROUND_CUTOFF)


def write_binary_pgm(raster: Raster) -> bytes:
    """Encode a binary raster as P5 (foreground 255, background 0)."""
    foreground = raster.as_bool()
    header = f"P5\n{raster.width} {raster.height}\n{PGM_MAXVAL}\n".encode("ascii")
    return header + (foreground.astype(np.uint8) * PGM_MAXVAL).tobytes()
