from .floatmap import read_float_map, write_float_map
from .graph_json import (
    is_windowed_json,
    read_graph_json,
    read_windowed_graphs,
    write_graph_json,
    write_windowed_graphs,
)
from .pgm import read_binary_pgm, write_binary_pgm

__all__ = [
    "is_windowed_json",
    "read_binary_pgm",
    "read_float_map",
    "read_graph_json",
    "read_windowed_graphs",
    "write_binary_pgm",
    "write_float_map",
    "write_graph_json",
    "write_windowed_graphs",
]
