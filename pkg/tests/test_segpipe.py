import math

import numpy as np
import pytest

from tubemorph import Raster, TubeGraph
from tubemorph.errors import ShapeMismatchError
from tubemorph.graph_construct import build_graph
from tubemorph.segpipe import dilate_with_seg_limit, segment_postprocess, soft_skeleton, threshold
from tubemorph.skeleton import skeletonize, thin


def brute_force_soft_skeleton(s_m: np.ndarray, thresh: float) -> np.ndarray:
    skeleton = np.argwhere(thin(s_m > thresh))
    height, width = s_m.shape
    distance = np.zeros((height, width))
    for r in range(height):
        for c in range(width):
            distance[r, c] = min(math.hypot(r - y, c - x) for y, x in skeleton)
    distance /= distance.max()
    return s_m * (1.0 - distance)


def components_touching(seed: np.ndarray, limit: np.ndarray) -> np.ndarray:
    """Union of the 8-connected components of `limit` that contain a seed pixel."""
    height, width = limit.shape
    keep = np.zeros_like(limit)
    stack = [tuple(p) for p in np.argwhere(seed & limit)]
    for p in stack:
        keep[p] = True
    while stack:
        y, x = stack.pop()
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                ny, nx = y + dy, x + dx
                if 0 <= ny < height and 0 <= nx < width and limit[ny, nx] and not keep[ny, nx]:
                    keep[ny, nx] = True
                    stack.append((ny, nx))
    return keep


def test_threshold_is_strict():
    s_m = Raster.probability([[0.5, 0.51, 0.49]])
    assert threshold(s_m, 0.5).values.tolist() == [[0, 1, 0]]


def test_soft_skeleton_of_empty_map():
    p_m = soft_skeleton(Raster.zeros(6, 6, kind="probability"))
    assert p_m.kind == "probability"
    assert p_m.count() == 0


def test_soft_skeleton_of_thin_line_is_the_line():
    values = np.zeros((5, 9), dtype=np.float32)
    values[2, 1:8] = 1.0
    assert np.array_equal(soft_skeleton(Raster.probability(values)).values, values)


def test_soft_skeleton_of_disk_matches_brute_force_distances():
    yy, xx = np.mgrid[:15, :15]
    disk = ((yy - 7) ** 2 + (xx - 7) ** 2 <= 25).astype(np.float32) * np.float32(0.9)
    expected = brute_force_soft_skeleton(disk.astype(np.float64), 0.5)
    result = soft_skeleton(Raster.probability(disk), 0.5)
    np.testing.assert_allclose(result.values, expected, atol=1e-6)


def test_dilate_empty_seed():
    s_mask = Raster.binary(np.ones((4, 4)))
    assert dilate_with_seg_limit(Raster.zeros(4, 4), s_mask).count() == 0


def test_dilate_saturating_seed(rng):
    s_mask = Raster.binary(rng.random((10, 10)) < 0.5)
    assert dilate_with_seg_limit(Raster.binary(np.ones((10, 10))), s_mask) == s_mask


def test_dilate_selects_touched_component(ascii_mask):
    s_mask = ascii_mask(
        """
        ###....
        ###..##
        .....##
        """
    )
    m = ascii_mask(
        """
        .......
        .#.....
        .......
        """
    )
    expected = ascii_mask(
        """
        ###....
        ###....
        .......
        """
    )
    assert dilate_with_seg_limit(m, s_mask) == expected


def test_dilate_matches_component_selection_law(rng):
    for _ in range(100):
        limit = rng.random((16, 16)) < 0.45
        seed = rng.random((16, 16)) < 0.05
        result = dilate_with_seg_limit(Raster.binary(seed), Raster.binary(limit))
        assert np.array_equal(result.as_bool(), components_touching(seed, limit))
        assert dilate_with_seg_limit(result, Raster.binary(limit)) == result


def test_dilate_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        dilate_with_seg_limit(Raster.zeros(3, 3), Raster.zeros(3, 4))


def test_postprocess_with_empty_graph_is_empty():
    s_m = np.zeros((12, 20), dtype=np.float32)
    s_m[4:7, 2:18] = 0.9
    graph = TubeGraph(height=12, width=20, nodes=[], edges=[])
    assert segment_postprocess(Raster.probability(s_m), graph).count() == 0


def test_postprocess_drops_blob_away_from_graph():
    bar = np.zeros((12, 20), dtype=bool)
    bar[4:7, 2:18] = True
    graph, _ = build_graph(skeletonize(Raster.binary(bar)))
    s_m = bar.astype(np.float32) * np.float32(0.9)
    s_m[9:11, 2:4] = 0.9
    result = segment_postprocess(Raster.probability(s_m), graph, thresh=0.5)
    assert np.array_equal(result.as_bool(), bar)
