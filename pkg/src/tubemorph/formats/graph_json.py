"""
Graph JSON codecs.

Single graph: {"height": H, "width": W, "nodes": [[row, col], ...], "edges": [[i, j], ...]}
Windowed graphs: [{"origin": [row, col], "graph": {...}}, ...]

Coordinates are (row, col); a producer working in (x, y) must write
[y, x]. Edges are written canonically (i < j, sorted).
"""

import json
from typing import Any

from pydantic import ValidationError

from ..errors import SchemaError
from ..schema import Coord, TubeGraph, WindowedGraphs, WindowGraph


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    location = ".".join(str(part) for part in error["loc"])
    message = error["msg"].removeprefix("Value error, ")
    return f"{location}: {message}" if location else message


def graph_from_dict(payload: Any) -> TubeGraph:
    if not isinstance(payload, dict):
        raise SchemaError("graph must be a JSON object")
    missing = [key for key in ("height", "width", "nodes", "edges") if key not in payload]
    if missing:
        raise SchemaError(f"graph is missing {', '.join(missing)}")
    nodes = payload["nodes"]
    edges = payload["edges"]
    if not isinstance(nodes, list) or any(
        not isinstance(node, list) or len(node) != 2 for node in nodes
    ):
        raise SchemaError("nodes must be a list of [row, col] pairs")
    if not isinstance(edges, list) or any(
        not isinstance(edge, list) or len(edge) != 2 for edge in edges
    ):
        raise SchemaError("edges must be a list of [i, j] pairs")
    for edge in edges:
        if any(not isinstance(v, int) or isinstance(v, bool) for v in edge):
            raise SchemaError(f"edge {edge} has non-integer indices")
        if min(edge) < 0 or max(edge) >= len(nodes):
            raise SchemaError(f"edge index out of range: {edge} with {len(nodes)} nodes")
    try:
        return TubeGraph(
            height=payload["height"], width=payload["width"], nodes=nodes, edges=edges
        )
    except ValidationError as exc:
        raise SchemaError(_first_error(exc)) from None


def _number(value: float) -> int | float:
    return int(value) if float(value).is_integer() else float(value)


def graph_to_dict(graph: TubeGraph) -> dict:
    return {
        "height": graph.height,
        "width": graph.width,
        "nodes": [[_number(row), _number(col)] for row, col in graph.nodes],
        "edges": [[i, j] for i, j in graph.edges],
    }


def read_graph_json(text: str) -> TubeGraph:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    return graph_from_dict(payload)


def write_graph_json(graph: TubeGraph) -> str:
    return json.dumps(graph_to_dict(graph))


def read_windowed_graphs(text: str, window: int | None = None) -> WindowedGraphs:
    """
    Parse windowed-graph JSON. When `window` is None the window size is taken
    as the largest graph dimension in the file.
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(payload, list):
        raise SchemaError("windowed graphs must be a JSON list")

    items = []
    for k, entry in enumerate(payload):
        if not isinstance(entry, dict) or "origin" not in entry or "graph" not in entry:
            raise SchemaError(f"window {k} needs 'origin' and 'graph'")
        origin = entry["origin"]
        if (
            not isinstance(origin, list)
            or len(origin) != 2
            or any(not isinstance(v, int) or v < 0 for v in origin)
        ):
            raise SchemaError(f"window {k} origin must be [row, col] non-negative integers")
        items.append(WindowGraph(origin=Coord(*origin), graph=graph_from_dict(entry["graph"])))

    if window is None:
        window = max((max(item.graph.shape) for item in items), default=1)
    try:
        return WindowedGraphs(window=window, windows=items)
    except ValidationError as exc:
        raise SchemaError(_first_error(exc)) from None


def write_windowed_graphs(windowed: WindowedGraphs) -> str:
    return json.dumps(
        [
            {"origin": [item.origin.row, item.origin.col], "graph": graph_to_dict(item.graph)}
            for item in windowed.windows
        ]
    )


def is_windowed_json(text: str) -> bool:
    """True when the document is a windowed-graph list rather than a single graph."""
    return text.lstrip().startswith("[")
