import numpy as np

from tubemorph import NoiseSpec, Raster, SynthSpec
from tubemorph.metrics import betti
from tubemorph.synth import (
    _DEGRADE_SALT,
    CLUTTER_VALUE,
    DROPPED_VALUE,
    SplitMix64,
    degrade,
    gen_tree_mask,
    make_sample,
)


def test_splitmix_reference_values():
    rng = SplitMix64(0)
    assert rng.next_u64() == 0xE220A8397B1DCDAF
    assert rng.next_u64() == 0x6E789E6AA1B965F4


def test_random_array_matches_scalar_draws():
    scalar = SplitMix64(42)
    vector = SplitMix64(42)
    expected = [scalar.random() for _ in range(257)]
    assert vector.random_array(257).tolist() == expected
    assert vector.state == scalar.state
    assert 0.0 <= min(expected) and max(expected) < 1.0


def test_same_seed_same_rasters():
    noise = NoiseSpec(drop_prob=0.2, clutter_prob=0.01)
    spec = SynthSpec(seed=11, size=64, n_branches=5, noise=noise)
    first = make_sample(spec)
    second = make_sample(spec)
    assert first.mask == second.mask
    assert first.centerline == second.centerline
    assert first.degraded.values.tobytes() == second.degraded.values.tobytes()
    assert first.graph == second.graph


def test_different_seeds_differ():
    first, _ = gen_tree_mask(SynthSpec(seed=1, size=64, n_branches=5))
    second, _ = gen_tree_mask(SynthSpec(seed=2, size=64, n_branches=5))
    assert first != second


def test_single_branch_without_wobble_is_straight():
    mask, centerline = gen_tree_mask(SynthSpec(seed=7, size=48, n_branches=1, wobble=0.0))
    rows = np.flatnonzero(mask.as_bool().any(axis=1))
    assert len(rows) == 3
    signature = betti(centerline)
    assert (signature.beta0, signature.beta1) == (1, 0)


def test_trees_are_acyclic():
    for seed in range(50):
        _, centerline = gen_tree_mask(SynthSpec(seed=seed, size=64, n_branches=6))
        assert betti(centerline).beta1 == 0


def test_degrade_without_noise_keeps_indicator():
    _, centerline = gen_tree_mask(SynthSpec(seed=4, size=64))
    degraded = degrade(centerline, NoiseSpec(), seed=4)
    assert np.array_equal(degraded.values, centerline.values.astype(np.float32))


def test_degrade_drop_everything():
    values = np.zeros((8, 8), dtype=np.uint8)
    values[4, 1:7] = 1
    degraded = degrade(Raster.binary(values), NoiseSpec(drop_prob=1.0), seed=0)
    assert np.allclose(degraded.values[4, 1:7], DROPPED_VALUE)
    assert degraded.count() == 6


def test_degrade_clutter_only_raises_background():
    values = np.zeros((32, 32), dtype=np.uint8)
    values[16, 4:28] = 1
    degraded = degrade(Raster.binary(values), NoiseSpec(clutter_prob=0.05), seed=3)
    assert np.all(degraded.values[16, 4:28] == 1.0)
    assert set(np.unique(degraded.values).tolist()) <= {0.0, np.float32(0.6).item(), 1.0}
    assert (degraded.values == np.float32(0.6)).any()


def test_sample_windows_cover_centerline():
    sample = make_sample(SynthSpec(seed=2, size=64, n_branches=4), window=32, stride=30)
    assert sample.windows.window == 32
    assert all(w.graph.height <= 32 and w.graph.width <= 32 for w in sample.windows.windows)
    assert len(sample.graph.edges) >= 1


def test_degrade_blur_of_single_pixel_is_box_kernel():
    values = np.zeros((5, 5), dtype=np.uint8)
    values[2, 2] = 1
    degraded = degrade(Raster.binary(values), NoiseSpec(blur_radius=1), seed=0)
    expected = np.zeros((5, 5))
    expected[1:4, 1:4] = 1 / 9
    np.testing.assert_allclose(degraded.values, expected, atol=1e-7)


def replay_degrade(values: np.ndarray, noise: NoiseSpec, seed: int) -> np.ndarray:
    """Pixel-by-pixel rendition of the degradation with scalar draws."""
    rng = SplitMix64(seed ^ _DEGRADE_SALT)
    height, width = values.shape
    out = np.zeros((height, width))
    for r in range(height):
        for c in range(width):
            if values[r, c]:
                out[r, c] = DROPPED_VALUE if rng.random() < noise.drop_prob else 1.0
    k = noise.blur_radius
    if k:
        padded = np.pad(out, k)
        out = np.array(
            [
                [padded[r : r + 2 * k + 1, c : c + 2 * k + 1].mean() for c in range(width)]
                for r in range(height)
            ]
        )
    for r in range(height):
        for c in range(width):
            if not values[r, c] and rng.random() < noise.clutter_prob:
                for rr in range(r, min(r + 2, height)):
                    for cc in range(c, min(c + 2, width)):
                        out[rr, cc] = max(out[rr, cc], CLUTTER_VALUE)
    return out


def test_degrade_matches_pinned_draw_order():
    values = np.zeros((12, 12), dtype=np.uint8)
    values[3, 1:11] = 1
    values[3:10, 6] = 1
    noise = NoiseSpec(drop_prob=0.4, blur_radius=1, clutter_prob=0.1)
    for seed in (0, 1, 2024):
        degraded = degrade(Raster.binary(values), noise, seed=seed)
        np.testing.assert_allclose(
            degraded.values, replay_degrade(values, noise, seed), atol=1e-6
        )


def test_degrade_saturated_noise_golden():
    values = np.zeros((3, 4), dtype=np.uint8)
    values[0, 0] = values[2, 3] = 1
    noise = NoiseSpec(drop_prob=1.0, clutter_prob=1.0)
    degraded = degrade(Raster.binary(values), noise, seed=17)
    expected = np.array(
        [
            [0.2, 0.6, 0.6, 0.6],
            [0.6, 0.6, 0.6, 0.6],
            [0.6, 0.6, 0.6, 0.6],
        ],
        dtype=np.float32,
    )
    assert degraded.values.tobytes() == expected.tobytes()
