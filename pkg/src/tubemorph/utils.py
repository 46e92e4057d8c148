"""
Utility functions for tubemorph
"""

import os
from collections.abc import Iterator
from pathlib import Path

import numpy as np
from scipy import ndimage

# (d_row, d_col), row-major order
EIGHT_NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
)

EIGHT_CONNECTIVITY = np.ones((3, 3), dtype=bool)


def neighbors8(row: int, col: int, height: int, width: int) -> Iterator[tuple[int, int]]:
    """In-bounds 8-neighbors of (row, col), row-major."""
    for d_row, d_col in EIGHT_NEIGHBOR_OFFSETS:
        r, c = row + d_row, col + d_col
        if 0 <= r < height and 0 <= c < width:
            yield r, c


def label8(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """8-connected component labeling; background is 0."""
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTIVITY)
    return labels, int(count)


def validate_local_file(file_path: str | os.PathLike) -> None:
    """
    Validate that a local file exists and is readable.

    Args:
        file_path: Path to the file

    Raises:
        FileNotFoundError: If file doesn't exist
        ValueError: If path is not a file
    """
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"File not found: {file_path}")

    if not os.path.isfile(file_path):
        raise ValueError(f"Path is not a file: {file_path}")


def read_local_bytes(file_path: str | os.PathLike) -> bytes:
    validate_local_file(file_path)
    return Path(file_path).read_bytes()


def write_local_bytes(file_path: str | os.PathLike, data: bytes) -> Path:
    """Write bytes, creating parent directories as needed."""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return path
