"""
Deterministic synthetic tubular structures and degraded probability maps.

All randomness comes from SplitMix64 so a (seed, spec) pair reproduces the
same rasters on any platform:

    state = state + 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)                      (all arithmetic mod 2**64)

Uniform reals use the top 53 bits: (out >> 11) * 2**-53.
"""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import ndimage
from skimage.draw import line

from .config import DEFAULT_STRIDE, DEFAULT_WINDOW
from .graph_construct import build_graph, window_graphs
from .schema import NoiseSpec, Raster, SynthSpec, TubeGraph, WindowedGraphs
from .skeleton import skeletonize
from .utils import EIGHT_CONNECTIVITY

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_DEGRADE_SALT = 0xD1B54A32D192ED03

MARGIN = 4  # strokes stay this far from the border
STEP = 3.0  # stroke segment length in pixels
CLEARANCE = 4  # Chebyshev distance kept from earlier strokes
ORIGIN_ZONE = 6  # around a branch origin the clearance is not enforced
STRAIGHT_STEPS = 3  # branch steps taken before wobble applies
MIN_BRANCH_STEPS = 3
DROPPED_VALUE = 0.2
CLUTTER_VALUE = 0.6


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randrange(self, n: int) -> int:
        return self.next_u64() % n

    def random_array(self, n: int) -> np.ndarray:
        """The next `n` uniforms at once; same values as `n` calls to random()."""
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * _GOLDEN) & _MASK64
        return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


class _Canvas:
    def __init__(self, size: int):
        self.size = size
        self.strokes = np.zeros((size, size), dtype=bool)
        self.polylines: list[list[tuple[float, float]]] = []
        self.origins: list[tuple[int, int]] = []

    def inside(self, row: float, col: float) -> bool:
        low, high = MARGIN, self.size - 1 - MARGIN
        return low <= row <= high and low <= col <= high

    def segment(
        self, a: tuple[float, float], b: tuple[float, float]
    ) -> tuple[np.ndarray, np.ndarray]:
        return line(round(a[0]), round(a[1]), round(b[0]), round(b[1]))

    def commit(self, points: list[tuple[float, float]]) -> None:
        for a, b in zip(points, points[1:], strict=False):
            rows, cols = self.segment(a, b)
            self.strokes[rows, cols] = True
        self.polylines.append(points)


def _walk(
    rng: SplitMix64,
    canvas: _Canvas,
    start: tuple[float, float],
    heading: float,
    spread: float,
    wobble: float,
    forbidden: np.ndarray | None = None,
) -> list[tuple[float, float]]:
    """Grow a polyline whose heading stays within `spread` of its initial heading."""
    base = heading
    points = [start]
    origin = (round(start[0]), round(start[1]))
    for step in range(canvas.size):
        if forbidden is None or step >= STRAIGHT_STEPS:
            heading = min(max(heading + rng.uniform(-wobble, wobble), base - spread), base + spread)
        row = points[-1][0] + STEP * math.sin(heading)
        col = points[-1][1] + STEP * math.cos(heading)
        if not canvas.inside(row, col):
            break
        if forbidden is not None:
            rows, cols = canvas.segment(points[-1], (row, col))
            far = np.maximum(np.abs(rows - origin[0]), np.abs(cols - origin[1])) > ORIGIN_ZONE
            if forbidden[rows[far], cols[far]].any():
                break
        points.append((row, col))
    return points


def _grow_branch(rng: SplitMix64, canvas: _Canvas, wobble: float) -> None:
    parent = canvas.polylines[rng.randrange(len(canvas.polylines))]
    if len(parent) < 3:
        return
    j = 1 + rng.randrange(len(parent) - 2)
    origin = parent[j]
    anchor = (round(origin[0]), round(origin[1]))
    crowded = any(
        max(abs(anchor[0] - r), abs(anchor[1] - c)) < 2 * ORIGIN_ZONE for r, c in canvas.origins
    )
    if crowded:
        return

    ahead = parent[j + 1]
    parent_heading = math.atan2(ahead[0] - origin[0], ahead[1] - origin[1])
    side = 1.0 if rng.random() < 0.5 else -1.0
    heading = parent_heading + side * rng.uniform(math.pi / 4, math.pi / 2)
    forbidden = ndimage.binary_dilation(
        canvas.strokes, structure=EIGHT_CONNECTIVITY, iterations=CLEARANCE
    )
    points = _walk(rng, canvas, origin, heading, math.pi / 4, wobble, forbidden)
    if len(points) - 1 < MIN_BRANCH_STEPS:
        return
    canvas.origins.append(anchor)
    canvas.commit(points)


def gen_tree_mask(spec: SynthSpec) -> tuple[Raster, Raster]:
    """
    Random branching tree of 3-pixel-wide tubes and its centerline.

    A trunk crosses the image west to east; further branches leave existing
    strokes and keep clear of everything else, so the tree has no cycles.

    Returns:
        tuple: (gt_mask, gt_centerline) with gt_centerline = skeletonize(gt_mask)
    """
    rng = SplitMix64(spec.seed)
    size = spec.size
    canvas = _Canvas(size)

    start_row = size / 4 + rng.random() * size / 2
    trunk = _walk(rng, canvas, (start_row, float(MARGIN)), 0.0, math.pi / 3, spec.wobble)
    canvas.origins.append((round(start_row), MARGIN))
    canvas.commit(trunk)
    for _ in range(spec.n_branches - 1):
        _grow_branch(rng, canvas, spec.wobble)

    mask = Raster.binary(ndimage.binary_dilation(canvas.strokes, structure=EIGHT_CONNECTIVITY))
    return mask, skeletonize(mask)


def degrade(p: Raster, noise: NoiseSpec, seed: int = 0) -> Raster:
    """
    Imperfect probability map from a binary centerline.

    Foreground starts at 1 and each pixel drops to 0.2 with `drop_prob`
    (row-major, one draw per pixel); an optional box blur follows; then every
    background pixel seeds a 2x2 clutter blob of 0.6 with `clutter_prob`.
    """
    rng = SplitMix64(seed ^ _DEGRADE_SALT)
    foreground = p.as_bool()
    values = foreground.astype(np.float64)

    draws = rng.random_array(int(foreground.sum()))
    values[foreground] = np.where(draws < noise.drop_prob, DROPPED_VALUE, 1.0)

    if noise.blur_radius > 0:
        values = ndimage.uniform_filter(values, size=2 * noise.blur_radius + 1, mode="constant")

    background = ~foreground
    draws = rng.random_array(int(background.sum()))
    for row, col in np.argwhere(background)[draws < noise.clutter_prob]:
        block = values[row : row + 2, col : col + 2]
        np.maximum(block, CLUTTER_VALUE, out=block)

    return Raster.probability(np.clip(values, 0.0, 1.0).astype(np.float32))


class Sample(BaseModel):
    """One synthetic instance with every derived artifact."""

    model_config = ConfigDict(frozen=True)

    spec: SynthSpec
    mask: Raster
    centerline: Raster
    degraded: Raster
    graph: TubeGraph
    windows: WindowedGraphs


def make_sample(
    spec: SynthSpec, window: int = DEFAULT_WINDOW, stride: int = DEFAULT_STRIDE
) -> Sample:
    mask, centerline = gen_tree_mask(spec)
    graph, _ = build_graph(centerline)
    return Sample(
        spec=spec,
        mask=mask,
        centerline=centerline,
        degraded=degrade(centerline, spec.noise, spec.seed),
        graph=graph,
        windows=window_graphs(centerline, window, stride),
    )
