import struct

import numpy as np
import pytest

from tubemorph import Raster, TubeGraph
from tubemorph.errors import FormatError, SchemaError
from tubemorph.formats import (
    is_windowed_json,
    read_binary_pgm,
    read_float_map,
    read_graph_json,
    read_windowed_graphs,
    write_binary_pgm,
    write_float_map,
    write_graph_json,
)


def test_read_pgm_maps_bright_pixels_to_foreground():
    raster = read_binary_pgm(b"P5\n2 2\n255\n" + bytes([255, 0, 0, 255]))
    assert raster.kind == "binary"
    assert raster.values.tolist() == [[1, 0], [0, 1]]


def test_read_pgm_cutoff_is_strictly_above_127():
    assert read_binary_pgm(b"P5 1 1 255\n" + bytes([128])).values.tolist() == [[1]]
    assert read_binary_pgm(b"P5 1 1 255\n" + bytes([127])).values.tolist() == [[0]]


def test_read_pgm_skips_comments():
    data = b"P5\n# made by hand\n3 1\n255\n" + bytes([0, 200, 0])
    assert read_binary_pgm(data).values.tolist() == [[0, 1, 0]]


def test_read_pgm_truncated_payload():
    with pytest.raises(FormatError, match="truncated payload") as exc:
        read_binary_pgm(b"P5\n2 2\n255\n" + bytes([1, 2, 3]))
    assert exc.value.field == "payload"


def test_read_pgm_rejects_trailing_bytes():
    with pytest.raises(FormatError, match="1 trailing bytes") as exc:
        read_binary_pgm(b"P5\n2 2\n255\n" + bytes([1, 2, 3, 4, 5]))
    assert exc.value.field == "payload"


@pytest.mark.parametrize(
    ("data", "field"),
    [
        (b"P2\n1 1\n255\n\x00", "magic"),
        (b"P5\n0 1\n255\n", "width"),
        (b"P5\n1 x\n255\n\x00", "height"),
        (b"P5\n1 1\n15\n\x00", "maxval"),
        (b"P5\n1 1", "maxval"),
    ],
)
def test_read_pgm_names_bad_field(data, field):
    with pytest.raises(FormatError) as exc:
        read_binary_pgm(data)
    assert exc.value.field == field


def test_write_pgm_uses_full_scale():
    data = write_binary_pgm(Raster.binary([[0, 1, 1]]))
    assert data == b"P5\n3 1\n255\n" + bytes([0, 255, 255])


def test_float_map_single_value():
    raster = Raster.probability([[0.5]])
    data = write_float_map(raster)
    assert len(data) == 16
    assert data[:4] == b"GMF1"
    assert read_float_map(data) == raster


def test_float_map_rejects_bad_magic():
    data = b"XXXX" + struct.pack("<II", 1, 1) + struct.pack("<f", 0.5)
    with pytest.raises(FormatError, match="bad magic"):
        read_float_map(data)


def test_float_map_rejects_out_of_range_value():
    data = b"GMF1" + struct.pack("<II", 1, 2) + struct.pack("<ff", 1.5, 0.0)
    with pytest.raises(FormatError, match="index 0"):
        read_float_map(data)


def test_float_map_rejects_trailing_bytes():
    data = write_float_map(Raster.probability([[0.25]])) + b"\x00"
    with pytest.raises(FormatError, match="trailing"):
        read_float_map(data)


def test_float_map_is_bit_exact():
    values = np.array([[0.1, 0.2, 0.3], [1.0, 0.0, 1e-7]], dtype=np.float32)
    restored = read_float_map(write_float_map(Raster.probability(values)))
    assert restored.values.tobytes() == values.tobytes()


def test_read_graph_json():
    graph = read_graph_json(
        '{"height":4,"width":4,"nodes":[[0,0],[3,3]],"edges":[[0,1]]}'
    )
    assert graph.nodes == ((0.0, 0.0), (3.0, 3.0))
    assert graph.edges == ((0, 1),)


def test_read_graph_json_rejects_out_of_range_edge():
    with pytest.raises(SchemaError, match="edge index out of range"):
        read_graph_json('{"height":4,"width":4,"nodes":[[0,0],[3,3]],"edges":[[0,5]]}')


def test_read_graph_json_rejects_node_outside_raster():
    with pytest.raises(SchemaError, match="outside"):
        read_graph_json('{"height":4,"width":4,"nodes":[[0,0],[4,1]],"edges":[]}')


def test_graph_edges_are_canonical():
    graph = TubeGraph(
        height=5, width=5, nodes=[(0, 0), (1, 1), (2, 2)], edges=[(2, 0), (1, 0), (0, 2)]
    )
    assert graph.edges == ((0, 1), (0, 2))
    assert read_graph_json(write_graph_json(graph)) == graph


def test_fractional_coordinates_survive():
    graph = TubeGraph(height=8, width=8, nodes=[(1.5, 2.25), (6.0, 7.0)], edges=[(0, 1)])
    assert read_graph_json(write_graph_json(graph)).nodes == ((1.5, 2.25), (6.0, 7.0))
    assert graph.rounded_nodes() == [(2, 2), (6, 7)]


def test_windowed_graphs_detection_and_parse():
    text = (
        '[{"origin":[0,30],"graph":{"height":32,"width":32,'
        '"nodes":[[0,0],[0,5]],"edges":[[0,1]]}}]'
    )
    assert is_windowed_json(text)
    assert not is_windowed_json('{"height":1}')
    windowed = read_windowed_graphs(text, window=32)
    assert windowed.window == 32
    assert windowed.windows[0].origin == (0, 30)


def test_windowed_graph_larger_than_window_rejected():
    text = '[{"origin":[0,0],"graph":{"height":40,"width":4,"nodes":[],"edges":[]}}]'
    with pytest.raises(SchemaError, match="larger than window"):
        read_windowed_graphs(text, window=32)


def test_raster_rejects_non_binary_values():
    with pytest.raises(ValueError, match="not 0 or 1"):
        Raster.binary([[0, 2]])


def test_raster_is_read_only():
    raster = Raster.binary([[0, 1]])
    with pytest.raises(ValueError):
        raster.values[0, 0] = 1
