from __future__ import annotations

import math
from collections.abc import Iterator
from enum import StrEnum
from typing import Any, Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import (
    DEFAULT_ALPHA,
    DEFAULT_GAMMA,
    DEFAULT_LAMBDA_CLASS,
    DEFAULT_LAMBDA_COORD,
    DEFAULT_P_THRESH,
    DEFAULT_PATCH,
    DEFAULT_STRIDE,
    DEFAULT_THRESH,
    DEFAULT_TOL,
    DEFAULT_WINDOW,
    ROAD_ALPHA,
    ROAD_STRIDE,
    ROAD_WINDOW,
)

RasterKind = Literal["binary", "probability"]
TieBreak = Literal["cost-length-lex", "cost-lex"]


class Coord(NamedTuple):
    row: int
    col: int


def _frozen_array(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class Raster(BaseModel):
    """
    Dense 2D grid holding either a binary mask or a probability map.

    Binary rasters are stored as uint8 {0, 1}; probability rasters as float32
    in [0, 1]. The array is copied and made read-only on construction.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: RasterKind = Field(description="binary or probability")
    values: np.ndarray = Field(description="row-major 2D array of shape (height, width)")

    @model_validator(mode="before")
    @classmethod
    def _coerce_values(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        kind = data.get("kind")
        array = np.array(data.get("values"), copy=True)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError(f"raster must be a non-empty 2D array, got shape {array.shape}")

        if kind == "binary":
            if array.dtype != np.bool_:
                bad = np.flatnonzero((array != 0) & (array != 1))
                if bad.size:
                    raise ValueError(f"binary raster value at index {bad[0]} is not 0 or 1")
            array = array.astype(np.uint8)
        elif kind == "probability":
            array = array.astype(np.float32)
            bad = np.flatnonzero(~np.isfinite(array) | (array < 0.0) | (array > 1.0))
            if bad.size:
                raise ValueError(
                    f"probability value {array.flat[bad[0]]} at index {bad[0]} is outside [0, 1]"
                )
        return {**data, "values": _frozen_array(array)}

    @classmethod
    def binary(cls, values: Any) -> Raster:
        return cls(kind="binary", values=values)

    @classmethod
    def probability(cls, values: Any) -> Raster:
        return cls(kind="probability", values=values)

    @classmethod
    def zeros(cls, height: int, width: int, kind: RasterKind = "binary") -> Raster:
        return cls(kind=kind, values=np.zeros((height, width)))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def as_bool(self) -> np.ndarray:
        """Foreground as a fresh bool array (probability rasters: value > 0)."""
        return self.values > 0

    def count(self) -> int:
        return int(np.count_nonzero(self.values))

    def contains(self, p: tuple[int, int]) -> bool:
        return 0 <= p[0] < self.height and 0 <= p[1] < self.width

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Raster):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    __hash__ = None


class PixelClass(StrEnum):
    ISOLATED = "isolated"
    ENDPOINT = "endpoint"
    PATH_POINT = "path_point"
    JUNCTION = "junction"


class NeighborClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(description="foreground 8-neighbors", ge=0, le=8)
    kind: PixelClass

    @classmethod
    def from_count(cls, n: int) -> NeighborClass:
        if n == 0:
            kind = PixelClass.ISOLATED
        elif n == 1:
            kind = PixelClass.ENDPOINT
        elif n == 2:
            kind = PixelClass.PATH_POINT
        else:
            kind = PixelClass.JUNCTION
        return cls(n=n, kind=kind)


class TubeGraph(BaseModel):
    """
    Undirected simple graph over (row, col) node coordinates.

    Edges are canonicalised on construction: (i, j) with i < j, duplicates
    removed, sorted lexicographically.
    """

    model_config = ConfigDict(frozen=True)

    height: int = Field(ge=1)
    width: int = Field(ge=1)
    nodes: tuple[tuple[float, float], ...] = ()
    edges: tuple[tuple[int, int], ...] = ()

    @field_validator("edges", mode="before")
    @classmethod
    def _canonical_edges(cls, value: Any) -> Any:
        pairs = set()
        for edge in value:
            i, j = (int(v) for v in edge)
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            pairs.add((min(i, j), max(i, j)))
        return tuple(sorted(pairs))

    @model_validator(mode="after")
    def _check_ranges(self) -> TubeGraph:
        for k, (row, col) in enumerate(self.nodes):
            if not (0 <= row < self.height and 0 <= col < self.width):
                raise ValueError(
                    f"node {k} at ({row}, {col}) outside {self.height}x{self.width} raster"
                )
        n = len(self.nodes)
        for i, j in self.edges:
            if i < 0 or j >= n:
                raise ValueError(f"edge index out of range: ({i}, {j}) with {n} nodes")
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def rounded_nodes(self) -> list[Coord]:
        """Half-up rounding per axis, clamped into the raster."""
        return [
            Coord(
                min(int(math.floor(row + 0.5)), self.height - 1),
                min(int(math.floor(col + 0.5)), self.width - 1),
            )
            for row, col in self.nodes
        ]

    def degrees(self) -> list[int]:
        degree = [0] * len(self.nodes)
        for i, j in self.edges:
            degree[i] += 1
            degree[j] += 1
        return degree


class Pathway(BaseModel):
    """Traced branch: node indices and the path points strictly between them."""

    model_config = ConfigDict(frozen=True)

    u: int
    v: int
    pixels: tuple[Coord, ...] = ()


class RawTrace(BaseModel):
    """
    Pixel-level record of graph construction.

    `node_pixels[k]` holds every centerline pixel owned by node k (a merged
    junction cluster owns all of its members); `pathways` hold the path points
    of each edge, ordered from node u to node v.
    `resolutions` counts the loops and multiple edges that were broken up.
    """

    model_config = ConfigDict(frozen=True)

    node_pixels: tuple[tuple[Coord, ...], ...] = ()
    pathways: tuple[Pathway, ...] = ()
    resolutions: int = 0

    def pixels(self) -> Iterator[Coord]:
        for owned in self.node_pixels:
            yield from owned
        for pathway in self.pathways:
            yield from pathway.pixels


class PixelPath(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: tuple[Coord, ...] = Field(min_length=1)
    total_cost: float = Field(ge=0.0, description="sum of costs over points[1:]")

    @field_validator("points", mode="before")
    @classmethod
    def _as_coords(cls, value: Any) -> Any:
        return tuple(Coord(int(p[0]), int(p[1])) for p in value)

    @property
    def length(self) -> int:
        return len(self.points)

    @property
    def avg_cost(self) -> float:
        return self.total_cost / len(self.points)


class MorphConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_thresh: float = Field(default=DEFAULT_P_THRESH, ge=0.0, le=1.0)
    tie_break: TieBreak = "cost-length-lex"


class WindowGraph(BaseModel):
    model_config = ConfigDict(frozen=True)

    origin: Coord
    graph: TubeGraph


class WindowedGraphs(BaseModel):
    """Window-local graphs with the raster offset of each window."""

    model_config = ConfigDict(frozen=True)

    window: int = Field(ge=1)
    windows: tuple[WindowGraph, ...] = ()

    @model_validator(mode="after")
    def _check_window_size(self) -> WindowedGraphs:
        for item in self.windows:
            if item.graph.height > self.window or item.graph.width > self.window:
                raise ValueError(
                    f"graph at origin {tuple(item.origin)} is "
                    f"{item.graph.height}x{item.graph.width}, larger than window {self.window}"
                )
        return self


class TopoSignature(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta0: int = Field(ge=0)
    chi: int
    clamped: bool = False

    @property
    def beta1(self) -> int:
        return max(0, self.beta0 - self.chi)


class MetricsReport(BaseModel):
    task: Literal["centerline", "segmentation"] = "segmentation"
    dice: float = Field(ge=0.0, le=1.0)
    cl_dice: float = Field(ge=0.0, le=1.0)
    acc: float = Field(ge=0.0, le=1.0)
    auc: float | None = Field(default=None, ge=0.0, le=1.0)
    ari: float = Field(le=1.0)
    voi: float = Field(ge=0.0)
    beta0_err: float = Field(ge=0.0)
    beta1_err: float = Field(ge=0.0)
    chi_err: float = Field(ge=0.0)

    def csv_header(self) -> list[str]:
        return list(type(self).model_fields)

    def csv_row(self) -> list[str]:
        return ["" if v is None else str(v) for v in self.model_dump().values()]


class AblationRow(BaseModel):
    """One configuration of the ROI-size and post-processing sweep with its metrics."""

    model_config = ConfigDict(frozen=True)

    window: int | None = Field(default=None, ge=1, description="None for the thresholded map")
    stride: int | None = Field(default=None, ge=1)
    postprocess: bool
    report: MetricsReport

    def csv_header(self) -> list[str]:
        return ["window", "stride", "postprocess", *self.report.csv_header()]

    def csv_row(self) -> list[str]:
        settings = ["" if v is None else str(v) for v in (self.window, self.stride)]
        return [*settings, str(self.postprocess), *self.report.csv_row()]


class MatchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambda_class: float = Field(default=DEFAULT_LAMBDA_CLASS, ge=0.0)
    lambda_coord: float = Field(default=DEFAULT_LAMBDA_COORD, ge=0.0)
    alpha: float = Field(default=DEFAULT_ALPHA, ge=0.0)
    gamma: float = Field(default=DEFAULT_GAMMA, ge=0.0)


def _require_keys(data: Any, kind: str, *keys: str) -> None:
    if not isinstance(data, dict):
        raise ValueError(f"{kind} must be an object, got {type(data).__name__}")
    missing = [key for key in keys if key not in data]
    if missing:
        raise ValueError(f"{kind} is missing {', '.join(missing)}")


class _ArrayModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class PredNodes(_ArrayModel):
    scores: np.ndarray = Field(description="K node scores in (0, 1)")
    coords: np.ndarray = Field(description="K x 2 normalised coordinates in [0, 1]")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        _require_keys(data, "predicted nodes", "scores", "coords")
        scores = np.asarray(data["scores"], dtype=np.float64).reshape(-1)
        coords = np.asarray(data["coords"], dtype=np.float64).reshape(-1, 2)
        if scores.shape[0] != coords.shape[0]:
            raise ValueError(f"{scores.shape[0]} scores but {coords.shape[0]} coordinates")
        if np.any((scores < 0) | (scores > 1)):
            raise ValueError("node scores must lie in [0, 1]")
        if np.any((coords < 0) | (coords > 1)):
            raise ValueError("node coordinates must lie in the unit square")
        return {"scores": _frozen_array(scores), "coords": _frozen_array(coords)}

    @property
    def k(self) -> int:
        return self.scores.shape[0]


class GtNodes(_ArrayModel):
    coords: np.ndarray = Field(description="P x 2 normalised coordinates; slots P..K-1 are padding")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        _require_keys(data, "ground-truth nodes", "coords")
        coords = np.asarray(data["coords"], dtype=np.float64).reshape(-1, 2)
        if np.any((coords < 0) | (coords > 1)):
            raise ValueError("ground-truth coordinates must lie in the unit square")
        return {"coords": _frozen_array(coords)}

    @property
    def p(self) -> int:
        return self.coords.shape[0]


class Assignment(BaseModel):
    """sigma[i] is the prediction matched to ground-truth slot i (padding slots included)."""

    model_config = ConfigDict(frozen=True)

    sigma: tuple[int, ...]

    @field_validator("sigma")
    @classmethod
    def _injective(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if len(set(value)) != len(value):
            raise ValueError("assignment is not injective")
        if any(v < 0 for v in value):
            raise ValueError("assignment indices must be non-negative")
        return value


class Layer(_ArrayModel):
    weight: np.ndarray = Field(description="in_features x out_features")
    bias: np.ndarray = Field(description="out_features")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        _require_keys(data, "layer", "weight", "bias")
        weight = np.atleast_2d(np.asarray(data["weight"], dtype=np.float64))
        bias = np.asarray(data["bias"], dtype=np.float64).reshape(-1)
        if bias.shape[0] != weight.shape[1]:
            raise ValueError(f"bias of length {bias.shape[0]} for {weight.shape[1]} outputs")
        return {"weight": _frozen_array(weight), "bias": _frozen_array(bias)}


class QueryFeatures(_ArrayModel):
    """Matched queries and the two MLPs of the link predictor (ReLU between layers)."""

    queries: np.ndarray = Field(description="P x C matched query matrix")
    condition_mlp: tuple[Layer, ...] = Field(min_length=1)
    value_mlp: tuple[Layer, ...] = Field(min_length=1)

    @field_validator("queries", mode="before")
    @classmethod
    def _as_matrix(cls, value: Any) -> np.ndarray:
        queries = np.atleast_2d(np.asarray(value, dtype=np.float64))
        if queries.ndim != 2 or queries.shape[0] < 1 or queries.shape[1] < 1:
            raise ValueError(f"queries must be a P x C matrix, got shape {queries.shape}")
        return _frozen_array(queries)


class AdjacencyPair(_ArrayModel):
    gt: np.ndarray = Field(description="P x P target adjacency")
    pred: np.ndarray = Field(description="P x P predicted link probabilities")

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: Any) -> Any:
        _require_keys(data, "adjacency", "gt", "pred")
        return {
            "gt": _frozen_array(np.asarray(data["gt"], dtype=np.float64)),
            "pred": _frozen_array(np.asarray(data["pred"], dtype=np.float64)),
        }


class DecoderFixture(BaseModel):
    """Input of `decoder-check`: node sets plus optional adjacency and link-predictor inputs."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    gt: GtNodes
    pred: PredNodes
    config: dict[str, float] = Field(default_factory=dict)
    adjacency: AdjacencyPair | None = None
    link: QueryFeatures | None = None

    @field_validator("gt", mode="before")
    @classmethod
    def _wrap_coords(cls, value: Any) -> Any:
        # the fixture lists ground-truth coordinates directly
        return value if isinstance(value, dict | GtNodes) else {"coords": value}


class NoiseSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    drop_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    blur_radius: int = Field(default=0, ge=0, le=8)
    clutter_prob: float = Field(default=0.0, ge=0.0, le=1.0)


class SynthSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, ge=0)
    size: int = Field(default=64, ge=32, le=4096)
    n_branches: int = Field(default=4, ge=1, le=64)
    wobble: float = Field(default=0.3, ge=0.0, le=1.5, description="heading jitter per step (rad)")
    noise: NoiseSpec = NoiseSpec()


class RunConfig(BaseModel):
    """
    Validated command-line settings.

    Values come from the profile defaults, then a --config JSON file, then
    explicit flags (later sources win).
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    profile: Literal["vessel", "road"] = "vessel"
    window: int = Field(default=DEFAULT_WINDOW, ge=1)
    stride: int = Field(default=DEFAULT_STRIDE, ge=1)
    p_thresh: float = Field(default=DEFAULT_P_THRESH, ge=0.0, le=1.0)
    thresh: float = Field(default=DEFAULT_THRESH, gt=0.0, lt=1.0)
    tol: float = Field(default=DEFAULT_TOL, ge=0.0)
    patch: int = Field(default=DEFAULT_PATCH, ge=1)
    seed: int = Field(default=0, ge=0)
    alpha: float = Field(default=DEFAULT_ALPHA, ge=0.0)
    workers: int = Field(default=1, ge=1)

    @classmethod
    def for_profile(cls, profile: str = "vessel", **overrides: Any) -> RunConfig:
        values: dict[str, Any] = {"profile": profile}
        if profile == "road":
            values.update(window=ROAD_WINDOW, stride=ROAD_STRIDE, alpha=ROAD_ALPHA)
        values.update(overrides)
        return cls(**values)
