"""
Zhang–Suen thinning and the N statistic (foreground 8-neighbor count).

Both sub-iterations are evaluated on whole arrays at once: deletions within
a sub-iteration depend only on the image before it. `skeletonize` then
removes staircase corners so that only branch points keep N >= 3.
"""

import numpy as np
from scipy import ndimage

from .errors import BoundsError, PreconditionError
from .logger import logger
from .schema import NeighborClass, Raster
from .utils import label8

_NEIGHBOR_KERNEL = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.int32)
# P2..P9 positions inside a 3x3 window
_RING_OFFSETS = ((0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0), (0, 0))


def neighbor_counts(mask: np.ndarray) -> np.ndarray:
    """N for every pixel; out-of-bounds neighbors count as background."""
    foreground = np.asarray(mask, dtype=np.int32)
    return ndimage.convolve(foreground, _NEIGHBOR_KERNEL, mode="constant", cval=0)


def classify_pixel(mask: Raster, p: tuple[int, int]) -> NeighborClass:
    if not mask.contains(p):
        raise BoundsError(f"pixel {tuple(p)} outside {mask.height}x{mask.width} raster")
    row, col = p
    if not mask.values[row, col]:
        raise PreconditionError(f"pixel {tuple(p)} is background")
    window = mask.values[max(row - 1, 0) : row + 2, max(col - 1, 0) : col + 2]
    return NeighborClass.from_count(int(np.count_nonzero(window)) - 1)


def _ring(image: np.ndarray) -> list[np.ndarray]:
    """P2..P9 (N, NE, E, SE, S, SW, W, NW) as arrays aligned with `image`."""
    p = np.pad(image, 1)
    return [
        p[:-2, 1:-1],
        p[:-2, 2:],
        p[1:-1, 2:],
        p[2:, 2:],
        p[2:, 1:-1],
        p[2:, :-2],
        p[1:-1, :-2],
        p[:-2, :-2],
    ]


def _candidates(image: np.ndarray, step: int) -> np.ndarray:
    """Pixels a Zhang–Suen sub-iteration (step 0 or 1) would delete."""
    ring = _ring(image)
    p2, _, p4, _, p6, _, p8, _ = ring
    count = np.sum(ring, axis=0)
    transitions = np.zeros(image.shape, dtype=np.int32)
    for k in range(8):
        transitions += (ring[k] == 0) & (ring[(k + 1) % 8] == 1)

    removable = (image == 1) & (count >= 2) & (count <= 6) & (transitions == 1)
    if step == 0:
        removable &= (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
    else:
        removable &= (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
    return removable


def _guard_vanishing(image: np.ndarray, removable: np.ndarray) -> np.ndarray:
    """Keep the smallest pixel of any component the sub-iteration would erase entirely."""
    labels, count = label8(image)
    if count == 0 or not removable.any():
        return removable
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    doomed = np.bincount(labels.ravel(), weights=removable.ravel(), minlength=count + 1)
    vanishing = np.flatnonzero((sizes == doomed) & (sizes > 0))
    vanishing = vanishing[vanishing > 0]
    if vanishing.size == 0:
        return removable

    kept = removable.copy()
    ids, first = np.unique(labels.ravel(), return_index=True)
    first_of = dict(zip(ids.tolist(), first.tolist(), strict=True))
    for label in vanishing.tolist():
        kept.flat[first_of[label]] = False
    return kept


def _sub_iteration(image: np.ndarray, step: int) -> np.ndarray:
    return _guard_vanishing(image, _candidates(image, step))


def thin(mask: np.ndarray) -> np.ndarray:
    """Zhang–Suen thinning on a bool/0-1 array; returns uint8."""
    image = (np.asarray(mask) > 0).astype(np.uint8)
    iterations = 0
    while True:
        changed = False
        for step in (0, 1):
            removable = _sub_iteration(image, step)
            if removable.any():
                image[removable] = 0
                changed = True
        iterations += 1
        if not changed:
            break
    logger.debug(f"thinning converged after {iterations} iterations")
    return image


def is_thin(mask: np.ndarray) -> bool:
    """True when one more Zhang–Suen iteration would delete nothing."""
    image = (np.asarray(mask) > 0).astype(np.uint8)
    return not (_sub_iteration(image, 0).any() or _sub_iteration(image, 1).any())


def _crossing_number(ring: list[int]) -> int:
    """8-connectivity number of the center pixel; 1 means deleting it keeps the topology."""
    empty = [1 - v for v in ring]
    return sum(
        empty[k] - empty[k] * empty[(k + 1) % 8] * empty[(k + 2) % 8] for k in (0, 2, 4, 6)
    )


def _removable_corner(window: np.ndarray) -> bool:
    if not window[1, 1]:
        return False
    ring = [int(window[offset]) for offset in _RING_OFFSETS]
    sides = ring[0::2]
    corner = any(sides[k] and sides[(k + 1) % 4] for k in range(4))
    return corner and sum(ring) >= 2 and _crossing_number(ring) == 1


def remove_staircases(mask: np.ndarray) -> np.ndarray:
    """
    Delete corner pixels (two perpendicular 4-neighbors) that are simple points.

    Zhang–Suen leaves such corners on diagonal runs; each has N >= 3 and would
    read as a junction. Pixels are removed one at a time in row-major order so
    adjacent corners never disconnect a branch.
    """
    padded = np.pad((np.asarray(mask) > 0).astype(np.uint8), 1)
    image = padded[1:-1, 1:-1]
    sides = _ring(image)[0::2]
    candidates = np.zeros(image.shape, dtype=bool)
    for k in range(4):
        candidates |= (sides[k] & sides[(k + 1) % 4]).astype(bool)
    candidates &= image == 1
    removed = 0
    for row, col in np.argwhere(candidates):
        window = padded[row : row + 3, col : col + 3]
        if _removable_corner(window):
            window[1, 1] = 0
            removed += 1
    if removed:
        logger.debug(f"removed {removed} staircase pixels")
    return image.copy()


def skeleton_array(mask: np.ndarray) -> np.ndarray:
    """Zhang–Suen thinning followed by staircase removal, repeated until both are stable."""
    image = thin(mask)
    while True:
        pruned = remove_staircases(image)
        if np.array_equal(pruned, image):
            return image
        image = thin(pruned)


def skeletonize(mask: Raster) -> Raster:
    return Raster.binary(skeleton_array(mask.values))
