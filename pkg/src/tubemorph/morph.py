"""
Morphing a TubeGraph into a single-pixel-wide centerline mask.

Every edge is searched with SkeletonDijkstra on the cost map C = 1 - P_m; the
union of accepted paths is the output mask. Whole images are processed as a
grid of windows whose masks are OR-combined.
"""

import heapq
from functools import partial

import numpy as np

from .errors import BoundsError, SchemaError, ShapeMismatchError
from .executors import BaseExecutor, SerialExecutor, get_executor
from .graph_construct import window_origins
from .logger import logger
from .schema import Coord, MorphConfig, PixelPath, Raster, TieBreak, TubeGraph, WindowedGraphs
from .utils import EIGHT_NEIGHBOR_OFFSETS, neighbors8


def _as_cost(cost: Raster | np.ndarray) -> np.ndarray:
    values = cost.values if isinstance(cost, Raster) else np.asarray(cost)
    return values.astype(np.float64)


def skeleton_dijkstra(
    s: tuple[int, int],
    e: tuple[int, int],
    cost: Raster | np.ndarray,
    p_thresh: float,
    tie_break: TieBreak = "cost-length-lex",
) -> PixelPath | None:
    """
    Best-first search for a skeleton-feasible path from s to e.

    A candidate pixel may join a path only if exactly one of its 8-neighbors
    (the pixel it extends) is already on that path. A pixel is closed the first
    time a path ending there is popped; later entries ending there are dropped.
    Queue order is (total cost, path length, path) under "cost-length-lex" and
    (total cost, path) under "cost-lex"; both are deterministic.

    Args:
        s: start pixel
        e: end pixel
        cost: per-pixel cost in [0, 1] (1 - P_m)
        p_thresh: maximum accepted average cost (total / number of points)
        tie_break: ordering among equal-cost queue entries

    Returns:
        PixelPath | None: None when e is unreachable or the path is too costly

    Raises:
        BoundsError: s or e outside the cost raster
    """
    grid = _as_cost(cost)
    height, width = grid.shape
    s, e = Coord(*s), Coord(*e)
    for name, p in (("start", s), ("end", e)):
        if not (0 <= p.row < height and 0 <= p.col < width):
            raise BoundsError(f"{name} {tuple(p)} outside {height}x{width} cost raster")
    if s == e:
        return PixelPath(points=[s], total_cost=0.0)

    by_length = tie_break == "cost-length-lex"
    closed = np.zeros((height, width), dtype=bool)
    queue: list[tuple[float, int, tuple[Coord, ...]]] = [(0.0, int(by_length), (s,))]
    while queue:
        total, _, path = heapq.heappop(queue)
        tip = path[-1]
        if closed[tip]:
            continue
        closed[tip] = True

        if tip == e:
            if total / len(path) > p_thresh:
                return None
            return PixelPath(points=path, total_cost=total)

        on_path = set(path)
        for r, c in neighbors8(tip.row, tip.col, height, width):
            if closed[r, c]:
                continue
            touching = sum((q in on_path) for q in neighbors8(r, c, height, width))
            if touching > 1:
                continue
            extended = path + (Coord(r, c),)
            rank = len(extended) if by_length else 0
            heapq.heappush(queue, (total + grid[r, c], rank, extended))
    return None


def check_path(
    path: PixelPath,
    p_thresh: float | None = None,
    cost: np.ndarray | None = None,
) -> list[str]:
    """
    Violations of the PixelPath invariants (empty when the path is valid).

    Checks 8-adjacency of consecutive points, uniqueness, the skeleton
    constraint and, when given, the recorded total against `cost` and the
    average against `p_thresh`.
    """
    problems = []
    points = path.points
    if len(set(points)) != len(points):
        problems.append("repeated coordinates")
    for k in range(1, len(points)):
        a, b = points[k - 1], points[k]
        if max(abs(a.row - b.row), abs(a.col - b.col)) != 1:
            problems.append(f"points {k - 1} and {k} are not 8-adjacent")
        earlier = set(points[:k])
        touching = sum(
            (b.row + dr, b.col + dc) in earlier for dr, dc in EIGHT_NEIGHBOR_OFFSETS
        )
        if touching > 1:
            problems.append(f"point {k} touches {touching} earlier points")
    if cost is not None:
        expected = float(sum(float(cost[p]) for p in points[1:]))
        if not np.isclose(expected, path.total_cost, rtol=0.0, atol=1e-9):
            problems.append(f"total cost {path.total_cost} differs from {expected}")
    if p_thresh is not None and path.avg_cost > p_thresh:
        problems.append(f"average cost {path.avg_cost} exceeds {p_thresh}")
    return problems


def _search(pair: tuple[Coord, Coord], cost: np.ndarray, cfg: MorphConfig) -> PixelPath | None:
    return skeleton_dijkstra(pair[0], pair[1], cost, cfg.p_thresh, cfg.tie_break)


def _check_shape(g: TubeGraph, p_m: Raster) -> None:
    if g.shape != p_m.shape:
        raise ShapeMismatchError(
            f"graph is {g.height}x{g.width} but probability map is {p_m.height}x{p_m.width}"
        )


def trace_edges(
    g: TubeGraph,
    p_m: Raster,
    cfg: MorphConfig | None = None,
    executor: BaseExecutor | None = None,
) -> list[PixelPath | None]:
    """Search result for every edge of `g`, in canonical edge order."""
    cfg = cfg or MorphConfig()
    _check_shape(g, p_m)
    cost = 1.0 - p_m.values.astype(np.float64)
    nodes = g.rounded_nodes()
    pairs = [(nodes[i], nodes[j]) for i, j in g.edges]
    executor = executor or SerialExecutor()
    return executor.map(partial(_search, cost=cost, cfg=cfg), pairs)


def _paint(paths: list[PixelPath | None], height: int, width: int) -> np.ndarray:
    mask = np.zeros((height, width), dtype=np.uint8)
    for path in paths:
        if path is None:
            continue
        rows, cols = zip(*path.points, strict=True)
        mask[list(rows), list(cols)] = 1
    return mask


def morph(
    g: TubeGraph,
    p_m: Raster,
    cfg: MorphConfig | None = None,
    workers: int | None = None,
) -> Raster:
    """
    Rasterize `g` into a centerline mask by searching every edge on 1 - P_m.

    Raises:
        ShapeMismatchError: graph and probability map disagree on dimensions
    """
    cfg = cfg or MorphConfig()
    paths = trace_edges(g, p_m, cfg, get_executor(workers))
    accepted = sum(path is not None for path in paths)
    logger.info(f"accepted {accepted} of {len(paths)} edges at p_thresh {cfg.p_thresh}")
    return Raster.binary(_paint(paths, g.height, g.width))


def _morph_window(item: tuple[TubeGraph, np.ndarray], cfg: MorphConfig) -> np.ndarray:
    graph, crop = item
    paths = trace_edges(graph, Raster.probability(crop), cfg)
    return _paint(paths, graph.height, graph.width)


def morph_windows(
    wg: WindowedGraphs,
    p_m: Raster,
    cfg: MorphConfig | None = None,
    window: int | None = None,
    stride: int | None = None,
    workers: int | None = None,
) -> Raster:
    """
    Morph every window graph on its crop of `p_m` and OR the masks together.

    Args:
        wg: window-local graphs with their raster origins
        p_m: full-size centerline probability map
        cfg: morph settings
        window: ROI size (defaults to wg.window); every graph must fit in it
        stride: tiling stride; origins off the implied grid are logged
        workers: parallelism degree over windows

    Raises:
        SchemaError: a window graph is larger than the window or leaves the raster
    """
    cfg = cfg or MorphConfig()
    window = window or wg.window
    height, width = p_m.shape

    grid = None
    if stride is not None:
        grid = (
            set(window_origins(height, window, stride)),
            set(window_origins(width, window, stride)),
        )

    origins = []
    items = []
    for item in sorted(wg.windows, key=lambda w: w.origin):
        row, col = item.origin
        graph = item.graph
        if graph.height > window or graph.width > window:
            raise SchemaError(
                f"window graph at {tuple(item.origin)} is {graph.height}x{graph.width}, "
                f"larger than window {window}"
            )
        if row + graph.height > height or col + graph.width > width:
            raise SchemaError(
                f"window at {tuple(item.origin)} of size {graph.height}x{graph.width} "
                f"leaves the {height}x{width} raster"
            )
        if grid is not None and (row not in grid[0] or col not in grid[1]):
            logger.warning(
                f"⚠️ window origin {tuple(item.origin)} is off the {window}/{stride} grid"
            )
        crop = p_m.values[row : row + graph.height, col : col + graph.width]
        origins.append(item.origin)
        items.append((graph, np.array(crop)))

    masks = get_executor(workers).map(partial(_morph_window, cfg=cfg), items)

    merged = np.zeros((height, width), dtype=np.uint8)
    for (row, col), mask in zip(origins, masks, strict=True):
        merged[row : row + mask.shape[0], col : col + mask.shape[1]] |= mask
    logger.debug(f"merged {len(items)} windows")
    return Raster.binary(merged)
