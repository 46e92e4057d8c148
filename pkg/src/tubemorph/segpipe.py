"""
Segmentation-task inference: soft skeletonization of a segmentation map and
constrained dilation of the morphed centerline back into the segmentation.
"""

import numpy as np
from scipy import ndimage

from .config import DEFAULT_THRESH
from .errors import ShapeMismatchError
from .logger import logger
from .morph import morph, morph_windows
from .schema import MorphConfig, Raster, TubeGraph, WindowedGraphs
from .skeleton import skeleton_array
from .utils import EIGHT_CONNECTIVITY


def threshold(s_m: Raster, thresh: float = DEFAULT_THRESH) -> Raster:
    """Binary mask of values strictly above `thresh`."""
    return Raster.binary(s_m.values > thresh)


def soft_skeleton(s_m: Raster, thresh: float = DEFAULT_THRESH) -> Raster:
    """
    Centerline probability map P_m = S_m * (1 - D).

    D is the Euclidean distance to the skeleton of the thresholded map,
    divided by its maximum over the image. An empty skeleton gives an all-zero map.
    """
    skeleton = skeleton_array(s_m.values > thresh).astype(bool)
    if not skeleton.any():
        return Raster.probability(np.zeros(s_m.shape, dtype=np.float32))

    distance = ndimage.distance_transform_edt(~skeleton)
    peak = distance.max()
    normalized = distance / peak if peak > 0 else np.zeros_like(distance)
    p_m = s_m.values.astype(np.float64) * (1.0 - normalized)
    return Raster.probability(np.clip(p_m, 0.0, 1.0).astype(np.float32))


def dilate_with_seg_limit(m: Raster, s_mask: Raster) -> Raster:
    """
    Grow M_0 = m AND s_mask by 3x3 dilation inside s_mask until it stops changing.

    The fixpoint is the union of the 8-connected components of s_mask that
    touch m.
    """
    if m.shape != s_mask.shape:
        raise ShapeMismatchError(f"mask is {m.shape} but segmentation mask is {s_mask.shape}")
    limit = s_mask.as_bool()
    seed = m.as_bool() & limit
    grown = ndimage.binary_propagation(seed, structure=EIGHT_CONNECTIVITY, mask=limit)
    return Raster.binary(grown)


def segment_postprocess(
    s_m: Raster,
    graphs: TubeGraph | WindowedGraphs,
    cfg: MorphConfig | None = None,
    thresh: float = DEFAULT_THRESH,
    window: int | None = None,
    stride: int | None = None,
    workers: int | None = None,
) -> Raster:
    """
    soft_skeleton -> morph (windowed when given WindowedGraphs) -> dilate_with_seg_limit.

    Returns:
        Raster: segmentation mask whose every component contains morphed centerline
    """
    p_m = soft_skeleton(s_m, thresh)
    if isinstance(graphs, WindowedGraphs):
        centerline = morph_windows(graphs, p_m, cfg, window=window, stride=stride, workers=workers)
    else:
        centerline = morph(graphs, p_m, cfg, workers=workers)
    s_mask = threshold(s_m, thresh)
    result = dilate_with_seg_limit(centerline, s_mask)
    logger.debug(f"post-processing kept {result.count()} of {s_mask.count()} pixels")
    return result
