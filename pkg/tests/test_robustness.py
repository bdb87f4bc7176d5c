import numpy as np
import pytest

from psidyn import (
    ArityError,
    ConfigError,
    MetadataError,
    analyze_pool,
    channel_subsample_run,
    gen_battery,
    layer_subset_report,
    layer_subset_run,
    multi_seed_run,
)
from psidyn.robustness import _subsample_columns

from conftest import make_trial


def test_identity_subset_reproduces_main_pipeline(small_battery):
    _, main = analyze_pool(list(small_battery))
    run, psis = layer_subset_run(small_battery, "all")
    assert [p.psi for p in psis] == [p.psi for p in main]
    assert [p.h_z for p in psis] == [p.h_z for p in main]
    assert run.label == "all"


def test_fraction_one_is_identity(small_battery):
    import math

    _, main = analyze_pool(list(small_battery))
    report = channel_subsample_run(small_battery, 1.0, seeds=[0])
    by_cond = {}
    for p in main:
        by_cond.setdefault(p.condition, []).append(p.psi)
    for cond, mean in report.runs[0].mean_psi.items():
        assert mean == math.fsum(by_cond[cond]) / len(by_cond[cond])


def test_layer_subset_structure(small_battery):
    report = layer_subset_report(small_battery)
    assert report.mode == "layers"
    assert [r.label for r in report.runs] == ["early", "late", "all"]
    assert report.cross_seed_std is None
    for run in report.runs:
        assert set(run.mean_psi) == {t.condition for t in small_battery}
        assert all(n == 6 for n in run.n_trials.values())


def test_layer_subsets_preserve_ordering(full_battery):
    # 64-channel depth subsets keep the qualitative ordering; the
    # complex-vs-damaged margin needs the full 15-trial pools
    report = layer_subset_report(full_battery)
    assert report.ordering_stable is True
    for run in report.runs:
        assert run.mean_psi["intact_complex"] == max(run.mean_psi.values())
        assert run.mean_psi["intact_repetition"] == min(run.mean_psi.values())


def test_layer_subset_requires_attribution(rng):
    bare = [
        make_trial(rng.standard_normal((256, 16)), trial_id=f"b{i}",
                   condition="intact_complex")
        for i in range(2)
    ]
    with pytest.raises(MetadataError):
        layer_subset_run(bare, "early")


def test_layer_subset_no_matching_channels(rng):
    trials = [
        make_trial(rng.standard_normal((256, 16)), trial_id=f"c{i}",
                   condition="intact_complex", block_ids=(2, 3))
        for i in range(2)
    ]
    with pytest.raises(MetadataError):
        layer_subset_run(trials, "early")
    with pytest.raises(ConfigError):
        layer_subset_run(trials, "sideways")


def test_subsample_columns_shared_and_sorted():
    cols = _subsample_columns(128, 0.5, seed=4)
    assert len(cols) == 64
    assert len(set(cols)) == 64
    assert np.array_equal(cols, np.sort(cols))
    assert np.array_equal(cols, _subsample_columns(128, 0.5, seed=4))


def test_subsample_too_few_channels():
    with pytest.raises(ArityError):
        _subsample_columns(16, 0.25, seed=0)  # 4 < 8


def test_subsample_determinism(small_battery):
    a = channel_subsample_run(small_battery, 0.5, seeds=[3, 4])
    b = channel_subsample_run(small_battery, 0.5, seeds=[3, 4])
    assert a == b


def test_subsample_stability_on_battery(full_battery):
    report = channel_subsample_run(full_battery, 0.5, seeds=[0, 1, 2])
    assert report.ordering_stable is True
    assert all(v <= 0.25 for v in report.cross_seed_std.values())


def test_multi_seed_ordering(full_battery):
    report = multi_seed_run(full_battery, fraction=0.5, n_seeds=5)
    assert report.mode == "seeds"
    assert len(report.runs) == 5
    wins = sum(
        1
        for run in report.runs
        if all(
            run.mean_psi["intact_complex"] > v
            for c, v in run.mean_psi.items()
            if c != "intact_complex"
        )
    )
    assert wins >= 4


def test_single_trial_per_condition_flags_low_n():
    trials = gen_battery(trials_per_condition=1, t=128, c=32, seed=2)
    report = multi_seed_run(trials, fraction=0.5, n_seeds=2)
    assert report.low_n is True
    assert len(report.runs) == 2


def test_one_seed_zero_spread(small_battery):
    report = channel_subsample_run(small_battery, 0.5, seeds=[7])
    assert all(v == 0.0 for v in report.cross_seed_std.values())
    assert report.cross_seed_std is not None


def test_ordering_none_without_canonical_conditions(rng):
    trials = [
        make_trial(rng.standard_normal((256, 16)) + (i % 2),
                   trial_id=f"x{i}", condition=f"cond{i % 2}")
        for i in range(4)
    ]
    report = channel_subsample_run(trials, 0.5, seeds=[0])
    assert report.ordering_stable is None


def test_runs_use_own_pool(small_battery):
    # every rerun re-normalises, so per-run means stay centred near 0
    report = channel_subsample_run(small_battery, 0.5, seeds=[0, 1])
    for run in report.runs:
        weighted = sum(m * run.n_trials[c] for c, m in run.mean_psi.items())
        total = sum(run.n_trials.values())
        assert abs(weighted / total) < 1e-9
