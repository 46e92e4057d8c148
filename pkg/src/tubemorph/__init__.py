from .config import Config
from .logger import logger
from .schema import (
    AblationRow,
    Assignment,
    Coord,
    GtNodes,
    MatchConfig,
    MetricsReport,
    MorphConfig,
    NoiseSpec,
    PixelPath,
    PredNodes,
    QueryFeatures,
    Raster,
    RunConfig,
    SynthSpec,
    TopoSignature,
    TubeGraph,
    WindowedGraphs,
    WindowGraph,
)

__all__ = [
    "AblationRow",
    "Assignment",
    "Config",
    "Coord",
    "GtNodes",
    "MatchConfig",
    "MetricsReport",
    "MorphConfig",
    "NoiseSpec",
    "PixelPath",
    "PredNodes",
    "QueryFeatures",
    "Raster",
    "RunConfig",
    "SynthSpec",
    "TopoSignature",
    "TubeGraph",
    "WindowGraph",
    "WindowedGraphs",
    "logger",
]
