import numpy as np
import pytest

from tubemorph import NoiseSpec, SynthSpec
from tubemorph.pipelines import ablate, ablation_stride, threshold_baseline
from tubemorph.synth import degrade, make_sample

NOISY = NoiseSpec(drop_prob=0.1, clutter_prob=0.02)


def test_ablation_strides():
    assert [ablation_stride(w) for w in (16, 32, 48)] == [14, 30, 45]


def test_segmentation_ablation_rows():
    sample = make_sample(SynthSpec(seed=3, size=64, n_branches=4))
    s_m = degrade(sample.mask, NOISY, seed=3)
    rows = ablate(s_m, sample.centerline, sample.mask, windows=(16, 32, 48), patch=64)
    assert [(row.window, row.stride, row.postprocess) for row in rows] == [
        (None, None, False),
        (16, 14, True),
        (32, 30, True),
        (48, 45, True),
    ]
    assert all(row.report.task == "segmentation" for row in rows)
    assert rows[0].csv_header()[:3] == ["window", "stride", "postprocess"]
    assert rows[0].csv_row()[:3] == ["", "", "False"]


def test_postprocessing_does_not_worsen_beta0_error():
    errors = {None: [], 16: [], 32: [], 48: []}
    for seed in range(5):
        sample = make_sample(SynthSpec(seed=seed, size=64, n_branches=5))
        s_m = degrade(sample.mask, NOISY, seed=seed)
        for row in ablate(s_m, sample.centerline, sample.mask, patch=64):
            errors[row.window].append(row.report.beta0_err)
    baseline = np.mean(errors.pop(None))
    assert baseline > 0
    for window, values in errors.items():
        assert np.mean(values) <= baseline, f"window {window}"


def test_centerline_ablation_uses_tolerant_scores():
    sample = make_sample(SynthSpec(seed=1, size=64, n_branches=4, noise=NOISY))
    rows = ablate(sample.degraded, sample.centerline, sample.centerline, task="centerline")
    assert len(rows) == 4
    assert all(row.report.task == "centerline" for row in rows)
    baseline = threshold_baseline(sample.degraded)
    assert rows[0].report.dice > 0 and baseline.count() > 0


def test_ablation_rejects_unknown_task():
    sample = make_sample(SynthSpec(seed=1, size=48))
    with pytest.raises(ValueError, match="Unknown task"):
        ablate(sample.degraded, sample.centerline, sample.centerline, task="roads")
