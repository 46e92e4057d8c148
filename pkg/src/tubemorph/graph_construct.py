"""
Graph construction from a centerline mask.

Junctions (N >= 3, adjacent ones merged) and endpoints (N <= 1) become
nodes; chains of path points (N = 2) between them become edges. Loops and
multiple edges are then broken up by inserting nodes on their pathways so
the result is a simple graph.
"""

import math
from collections import defaultdict

import numpy as np

from .errors import PreconditionError
from .logger import logger
from .schema import Coord, Pathway, Raster, RawTrace, TubeGraph, WindowedGraphs, WindowGraph
from .skeleton import is_thin, neighbor_counts
from .utils import label8, neighbors8

_RawEdge = tuple[int, int, tuple[Coord, ...]]


def _junction_nodes(junction: np.ndarray) -> list[tuple[Coord, list[Coord]]]:
    """Merge 8-adjacent junction pixels; the member nearest the centroid represents the cluster."""
    labels, count = label8(junction)
    members: dict[int, list[Coord]] = defaultdict(list)
    for (row, col), label in zip(np.argwhere(junction), labels[junction], strict=True):
        members[int(label)].append(Coord(int(row), int(col)))

    nodes = []
    for label in range(1, count + 1):
        pixels = members[label]
        centroid_row = sum(p.row for p in pixels) / len(pixels)
        centroid_col = sum(p.col for p in pixels) / len(pixels)
        rep = min(
            pixels,
            key=lambda p: ((p.row - centroid_row) ** 2 + (p.col - centroid_col) ** 2, p),
        )
        nodes.append((rep, pixels))
    return nodes


class _Tracer:
    """Mutable state of one construction run."""

    def __init__(self, mask: np.ndarray):
        self.mask = mask
        self.height, self.width = mask.shape
        self.owner = np.full(mask.shape, -1, dtype=np.int64)
        self.visited = np.zeros(mask.shape, dtype=bool)
        self.reps: list[Coord] = []
        self.pixels: list[list[Coord]] = []
        self.edges: list[_RawEdge] = []

    def add_node(self, rep: Coord, pixels: list[Coord]) -> int:
        node = len(self.reps)
        self.reps.append(rep)
        self.pixels.append(list(pixels))
        for p in pixels:
            self.owner[p] = node
        return node

    def absorb(self, node: int, p: Coord) -> None:
        self.pixels[node].append(p)
        self.owner[p] = node

    def foreground_neighbors(self, p: Coord) -> list[Coord]:
        return [
            Coord(r, c)
            for r, c in neighbors8(p.row, p.col, self.height, self.width)
            if self.mask[r, c]
        ]

    def walk(self, start_node: int, prev: Coord, first: Coord) -> tuple[int, list[Coord]]:
        """Follow path points from `first` until a node pixel is reached."""
        chain = [first]
        self.visited[first] = True
        cur = first
        while True:
            ahead = [q for q in self.foreground_neighbors(cur) if q != prev]
            if len(ahead) != 1:
                raise PreconditionError(
                    f"path point {tuple(cur)} does not have exactly two neighbors"
                )
            nxt = ahead[0]
            if self.owner[nxt] >= 0:
                return int(self.owner[nxt]), chain
            if self.visited[nxt]:
                raise PreconditionError(f"pathway through {tuple(nxt)} was traced twice")
            chain.append(nxt)
            self.visited[nxt] = True
            prev, cur = cur, nxt

    def trace_from_nodes(self) -> None:
        direct = set()
        for u in range(len(self.reps)):
            for p in sorted(self.pixels[u]):
                for q in self.foreground_neighbors(p):
                    other = int(self.owner[q])
                    if other >= 0:
                        if other != u:
                            direct.add((min(u, other), max(u, other)))
                        continue
                    if self.visited[q]:
                        continue
                    v, chain = self.walk(u, p, q)
                    self.edges.append((u, v, tuple(chain)))
        self.edges.extend((u, v, ()) for u, v in sorted(direct))

    def trace_cycles(self) -> None:
        """Junction-free cycles: seed a node at the smallest pixel, then walk around."""
        remaining = self.mask & ~self.visited & (self.owner < 0)
        labels, count = label8(remaining)
        if count == 0:
            return
        _, first = np.unique(labels.ravel(), return_index=True)
        for flat in first[1:]:
            seed = Coord(*(int(v) for v in np.unravel_index(flat, labels.shape)))
            if self.visited[seed]:
                continue
            node = self.add_node(seed, [seed])
            start = min(q for q in self.foreground_neighbors(seed))
            v, chain = self.walk(node, seed, start)
            self.edges.append((node, v, tuple(chain)))


def _split_positions(length: int) -> tuple[int, int]:
    """Indices of the path points nearest 1/3 and 2/3 along a loop pathway."""
    first = math.floor((length + 1) / 3 + 0.5) - 1
    second = math.floor(2 * (length + 1) / 3 + 0.5) - 1
    first = min(max(first, 0), length - 1)
    second = min(max(second, 0), length - 1)
    if first == second:
        if second < length - 1:
            second += 1
        else:
            first -= 1
    return first, second


def _resolve_loops(tracer: _Tracer) -> int:
    resolved = []
    events = 0
    for u, v, chain in tracer.edges:
        if u != v:
            resolved.append((u, v, chain))
            continue
        if len(chain) <= 1:
            # a single path point looping on its node belongs to the node
            for p in chain:
                tracer.absorb(u, p)
            events += 1
            continue
        first, second = _split_positions(len(chain))
        a = tracer.add_node(chain[first], [chain[first]])
        b = tracer.add_node(chain[second], [chain[second]])
        resolved.append((u, a, chain[:first]))
        resolved.append((a, b, chain[first + 1 : second]))
        resolved.append((b, u, chain[second + 1 :]))
        events += 1
    tracer.edges = resolved
    return events


def _resolve_multi_edges(tracer: _Tracer) -> int:
    groups: dict[tuple[int, int], list[_RawEdge]] = defaultdict(list)
    for u, v, chain in tracer.edges:
        if u > v:
            u, v, chain = v, u, chain[::-1]
        groups[(u, v)].append((u, v, chain))

    resolved = []
    events = 0
    for pair in sorted(groups):
        ordered = sorted(groups[pair], key=lambda edge: (len(edge[2]), edge[2]))
        resolved.append(ordered[0])
        for u, v, chain in ordered[1:]:
            if not chain:
                continue
            mid = (len(chain) - 1) // 2
            m = tracer.add_node(chain[mid], [chain[mid]])
            resolved.append((u, m, chain[:mid]))
            resolved.append((m, v, chain[mid + 1 :]))
            events += 1
    tracer.edges = resolved
    return events


def build_graph(centerline: Raster, require_thin: bool = True) -> tuple[TubeGraph, RawTrace]:
    """
    Build the simple graph of a centerline mask.

    Args:
        centerline: thin binary mask (a Zhang–Suen fixpoint)
        require_thin: skip the thinness check for cropped ROI skeletons when False

    Returns:
        tuple: the graph (nodes sorted by (row, col)) and the pixel-level trace

    Raises:
        PreconditionError: the mask is not thin
    """
    mask = centerline.as_bool()
    if require_thin and not is_thin(mask):
        raise PreconditionError("centerline mask is not thin; skeletonize it first")

    counts = neighbor_counts(mask)
    tracer = _Tracer(mask)
    nodes = _junction_nodes(mask & (counts >= 3))
    for r, c in np.argwhere(mask & (counts <= 1)):
        tip = Coord(int(r), int(c))
        nodes.append((tip, [tip]))
    for rep, pixels in sorted(nodes):
        tracer.add_node(rep, pixels)

    tracer.trace_from_nodes()
    tracer.trace_cycles()
    loops = _resolve_loops(tracer)
    multi = _resolve_multi_edges(tracer)
    if loops or multi:
        logger.debug(f"resolved {loops} loops and {multi} multiple edges")

    # renumber nodes in (row, col) order
    order = sorted(range(len(tracer.reps)), key=lambda k: tracer.reps[k])
    new_id = {old: new for new, old in enumerate(order)}
    pathways = []
    for u, v, chain in tracer.edges:
        u, v = new_id[u], new_id[v]
        if u > v:
            u, v, chain = v, u, chain[::-1]
        pathways.append(Pathway(u=u, v=v, pixels=chain))
    pathways.sort(key=lambda pw: (pw.u, pw.v))

    graph = TubeGraph(
        height=centerline.height,
        width=centerline.width,
        nodes=[(float(tracer.reps[k].row), float(tracer.reps[k].col)) for k in order],
        edges=[(pw.u, pw.v) for pw in pathways],
    )
    trace = RawTrace(
        node_pixels=[tuple(sorted(tracer.pixels[k])) for k in order],
        pathways=pathways,
        resolutions=loops + multi,
    )
    return graph, trace


def rasterize_trace(trace: RawTrace, height: int, width: int) -> Raster:
    mask = np.zeros((height, width), dtype=np.uint8)
    for p in trace.pixels():
        mask[p] = 1
    return Raster.binary(mask)


def window_origins(size: int, window: int, stride: int) -> list[int]:
    """Start offsets along one axis; the last window is snapped to the far edge."""
    if window <= 0 or stride <= 0:
        raise ValueError(f"window and stride must be positive, got {window} and {stride}")
    if size <= window:
        return [0]
    origins = list(range(0, size - window + 1, stride))
    if origins[-1] + window < size:
        origins.append(size - window)
    return origins


def window_graphs(centerline: Raster, window: int, stride: int) -> WindowedGraphs:
    """Per-ROI graphs built from the centerline cropped to each window (row-major)."""
    items = []
    for row in window_origins(centerline.height, window, stride):
        for col in window_origins(centerline.width, window, stride):
            crop = centerline.values[row : row + window, col : col + window]
            if not crop.any():
                continue
            graph, _ = build_graph(Raster.binary(crop), require_thin=False)
            items.append(WindowGraph(origin=Coord(row, col), graph=graph))
    return WindowedGraphs(window=window, windows=items)
