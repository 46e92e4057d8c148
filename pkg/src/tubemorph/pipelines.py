"""
The two inference pipelines, the thresholding baseline they are compared with,
and the ROI-size / post-processing sweep over both.
"""

from collections.abc import Sequence

from .config import DEFAULT_PATCH, DEFAULT_THRESH, DEFAULT_TOL
from .graph_construct import window_graphs
from .logger import logger
from .metrics import evaluate
from .morph import morph, morph_windows
from .schema import AblationRow, MorphConfig, Raster, TubeGraph, WindowedGraphs
from .segpipe import segment_postprocess, threshold

ABLATION_WINDOWS = (16, 32, 48)


def centerline_pipeline(
    p_m: Raster,
    graphs: TubeGraph | WindowedGraphs,
    cfg: MorphConfig | None = None,
    window: int | None = None,
    stride: int | None = None,
    workers: int | None = None,
) -> Raster:
    """Centerline probability map + (windowed) graphs -> single-pixel-wide centerline mask."""
    logger.info("🟢 centerline pipeline: morphing graphs")
    if isinstance(graphs, WindowedGraphs):
        result = morph_windows(graphs, p_m, cfg, window=window, stride=stride, workers=workers)
    else:
        result = morph(graphs, p_m, cfg, workers=workers)
    logger.info(f"✅ centerline mask has {result.count()} pixels")
    return result


def segmentation_pipeline(
    s_m: Raster,
    graphs: TubeGraph | WindowedGraphs,
    cfg: MorphConfig | None = None,
    thresh: float = DEFAULT_THRESH,
    window: int | None = None,
    stride: int | None = None,
    workers: int | None = None,
) -> Raster:
    """Segmentation probability map + graphs -> false-positive-suppressed segmentation mask."""
    logger.info("🟢 segmentation pipeline: soft skeleton, morph, constrained dilation")
    result = segment_postprocess(
        s_m, graphs, cfg, thresh=thresh, window=window, stride=stride, workers=workers
    )
    logger.info(f"✅ segmentation mask has {result.count()} pixels")
    return result


def threshold_baseline(p_m: Raster, thresh: float = DEFAULT_THRESH) -> Raster:
    return threshold(p_m, thresh)


def ablation_stride(window: int) -> int:
    """Stride paired with a window in the sweep: 16 -> 14, 32 -> 30, 48 -> 45."""
    return window - max(2, window // 16)


def ablate(
    prob: Raster,
    centerline: Raster,
    gt: Raster,
    task: str = "segmentation",
    windows: Sequence[int] = ABLATION_WINDOWS,
    cfg: MorphConfig | None = None,
    thresh: float = DEFAULT_THRESH,
    tol: float = DEFAULT_TOL,
    patch: int = DEFAULT_PATCH,
    workers: int | None = None,
) -> list[AblationRow]:
    """
    Score the thresholded map and the post-processed result for every ROI size.

    Per-window graphs are cut from `centerline`; each configuration is
    evaluated against `gt` with `evaluate`. The first row is the thresholded
    map without post-processing.

    Args:
        prob: S_m for the segmentation task, P_m for the centerline task
        centerline: single-pixel-wide mask the ROI graphs are built from
        gt: ground-truth mask of the task
        windows: ROI sizes to sweep

    Returns:
        list[AblationRow]: len(windows) + 1 rows
    """
    if task not in ("centerline", "segmentation"):
        raise ValueError(f"Unknown task: {task}. Supported tasks: centerline, segmentation")

    baseline = threshold_baseline(prob, thresh)
    rows = [
        AblationRow(
            postprocess=False,
            report=evaluate(baseline, gt, task=task, prob=prob, tol=tol, patch=patch),
        )
    ]
    for window in windows:
        stride = ablation_stride(window)
        graphs = window_graphs(centerline, window, stride)
        logger.info(f"🟢 ablation window {window} stride {stride}: {len(graphs.windows)} ROIs")
        if task == "centerline":
            result = centerline_pipeline(
                prob, graphs, cfg, window=window, stride=stride, workers=workers
            )
        else:
            result = segmentation_pipeline(
                prob, graphs, cfg, thresh=thresh, window=window, stride=stride, workers=workers
            )
        report = evaluate(result, gt, task=task, prob=prob, tol=tol, patch=patch)
        rows.append(AblationRow(window=window, stride=stride, postprocess=True, report=report))
    logger.info(f"✅ ablation finished with {len(rows)} configurations")
    return rows
