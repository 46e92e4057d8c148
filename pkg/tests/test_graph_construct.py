import numpy as np
import pytest

from tubemorph import Raster, SynthSpec
from tubemorph.errors import PreconditionError
from tubemorph.graph_construct import build_graph, rasterize_trace, window_graphs, window_origins
from tubemorph.skeleton import neighbor_counts
from tubemorph.synth import gen_tree_mask

LINE = """
.......
.#####.
.......
"""

PLUS = """
...#...
...#...
...#...
#######
...#...
...#...
...#...
"""

RING = """
.........
....#....
...#.#...
..#...#..
.#.....#.
..#...#..
...#.#...
....#....
.........
"""

# two junctions joined by an upper and a lower pathway, each with a tail
EYE = """
...........
....###....
...#...#...
###.....###
...#...#...
....###....
...........
"""


def test_straight_line(ascii_mask):
    graph, trace = build_graph(ascii_mask(LINE))
    assert graph.nodes == ((1.0, 1.0), (1.0, 5.0))
    assert graph.edges == ((0, 1),)
    assert trace.pathways[0].pixels == ((1, 2), (1, 3), (1, 4))


def test_plus_sign(ascii_mask):
    graph, trace = build_graph(ascii_mask(PLUS))
    assert len(graph.nodes) == 5
    assert len(graph.edges) == 4
    center = graph.nodes.index((3.0, 3.0))
    assert graph.degrees()[center] == 4
    # the inner arm pixels also have three or more neighbors and merge into the junction
    assert len(trace.node_pixels[center]) == 5


def test_junction_free_ring_is_split_in_three(ascii_mask):
    graph, trace = build_graph(ascii_mask(RING))
    assert len(graph.nodes) == 3
    assert len(graph.edges) == 3
    assert graph.degrees() == [2, 2, 2]
    # seed is the smallest pixel of the ring
    assert (1.0, 4.0) in graph.nodes
    assert sorted(len(pw.pixels) for pw in trace.pathways) == [3, 3, 3]


def test_second_pathway_between_same_nodes_is_split(ascii_mask):
    graph, trace = build_graph(ascii_mask(EYE))
    assert graph.nodes == ((3.0, 0.0), (3.0, 2.0), (3.0, 8.0), (3.0, 10.0), (5.0, 5.0))
    assert graph.edges == ((0, 1), (1, 2), (1, 4), (2, 3), (2, 4))
    assert trace.resolutions == 1


@pytest.mark.parametrize("text", [LINE, PLUS, RING, EYE])
def test_trace_covers_every_centerline_pixel(ascii_mask, text):
    centerline = ascii_mask(text)
    _, trace = build_graph(centerline)
    pixels = list(trace.pixels())
    assert len(pixels) == len(set(pixels))
    assert rasterize_trace(trace, centerline.height, centerline.width) == centerline


def test_isolated_pixel_becomes_node(ascii_mask):
    graph, _ = build_graph(ascii_mask("...\n.#.\n..."))
    assert graph.nodes == ((1.0, 1.0),)
    assert graph.edges == ()


def test_thick_mask_is_rejected(ascii_mask):
    with pytest.raises(PreconditionError, match="not thin"):
        build_graph(ascii_mask("....\n.##.\n.##.\n...."))


def test_graph_is_simple_on_synthetic_skeletons():
    for seed in range(5):
        _, centerline = gen_tree_mask(SynthSpec(seed=seed, size=64, n_branches=6))
        graph, trace = build_graph(centerline)
        assert all(i < j for i, j in graph.edges)
        assert len(set(graph.edges)) == len(graph.edges)
        assert rasterize_trace(trace, 64, 64) == centerline


def test_junction_nodes_have_degree_three_or_more():
    checked = 0
    for seed in range(50):
        _, centerline = gen_tree_mask(SynthSpec(seed=seed, size=64, n_branches=6))
        graph, trace = build_graph(centerline)
        if trace.resolutions:
            continue
        counts = neighbor_counts(centerline.values)
        degrees = graph.degrees()
        for k, pixels in enumerate(trace.node_pixels):
            if any(counts[p] >= 3 for p in pixels):
                assert degrees[k] >= 3, f"seed {seed}: node {graph.nodes[k]}"
                checked += 1
    assert checked > 0


def test_window_origins_snap_to_edge():
    assert window_origins(100, 32, 30) == [0, 30, 60, 68]
    assert window_origins(62, 32, 30) == [0, 30]
    assert window_origins(20, 32, 30) == [0]
    with pytest.raises(ValueError):
        window_origins(100, 0, 30)


def test_window_graphs_skip_empty_windows():
    values = np.zeros((64, 64), dtype=np.uint8)
    values[5, 2:20] = 1
    windowed = window_graphs(Raster.binary(values), 32, 30)
    assert windowed.window == 32
    assert [tuple(w.origin) for w in windowed.windows] == [(0, 0)]
    assert windowed.windows[0].graph.edges == ((0, 1),)
