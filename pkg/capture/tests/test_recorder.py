import json

import numpy as np
import pytest

from psidyn_capture import (
    CaptureConfigError,
    condition_config,
    load_prompts,
    record_trial,
    run_capture,
    select_channels,
)
from psidyn_capture.conditions import ConditionConfig
from psidyn_capture.recorder import perturbed_model

from conftest import TEST_HIDDEN


# ---------------------------------------------------------------------------
# conditions
# ---------------------------------------------------------------------------


def test_prompt_sets_load():
    assert len(load_prompts("complex")) == 10
    assert len(load_prompts("repetition")) == 10


def test_condition_presets():
    cc = condition_config("intact_complex")
    assert (cc.temperature, cc.top_k) == (1.0, 50)
    assert cc.prune_spec is None and cc.noise_spec is None
    assert condition_config("intact_noisy").temperature == 2.5
    assert condition_config("intact_noisy").top_k == 200
    assert condition_config("intact_repetition").temperature == 0.7
    dh = condition_config("damaged_heads")
    assert dh.prune_spec is not None
    assert len(dh.prune_spec.keep_heads) == 4
    dn = condition_config("damaged_noise")
    assert dn.noise_spec is not None
    assert dn.noise_spec.sigma_scale == 0.1


def test_sampling_params_are_locked():
    with pytest.raises(CaptureConfigError):
        ConditionConfig(condition="intact_noisy", temperature=1.0, top_k=50,
                        prompt_set=("x",))
    with pytest.raises(CaptureConfigError):
        condition_config("definitely_not_one")


# ---------------------------------------------------------------------------
# channel selection
# ---------------------------------------------------------------------------


def test_channel_selection_sorted_unique_deterministic():
    a = select_channels(TEST_HIDDEN, channel_seed=9)
    b = select_channels(TEST_HIDDEN, channel_seed=9)
    for block in (1, 4, 7, 10):
        assert len(a[block]) == 32
        assert len(set(a[block].tolist())) == 32
        assert np.array_equal(a[block], np.sort(a[block]))
        assert np.array_equal(a[block], b[block])
    c = select_channels(TEST_HIDDEN, channel_seed=10)
    assert any(not np.array_equal(a[k], c[k]) for k in a)


# ---------------------------------------------------------------------------
# single-trial recording
# ---------------------------------------------------------------------------


def test_record_trial_shape_and_determinism(tiny_model):
    config = condition_config("intact_complex", n_trials=1, gen_len=32)
    channels = select_channels(tiny_model.hidden_size, channel_seed=0)
    model = perturbed_model(tiny_model, config, perturb_seed=0)
    a = record_trial(model, config, channels, trial_seed=5, trial_index=0,
                     tokenizer=tiny_model.tokenizer)
    assert a.data.shape == (32, 128)
    assert np.isfinite(a.data).all()
    assert len(a.channel_indices) == 128
    b = record_trial(model, config, channels, trial_seed=5, trial_index=0,
                     tokenizer=tiny_model.tokenizer)
    assert np.array_equal(a.data, b.data)
    c = record_trial(model, config, channels, trial_seed=6, trial_index=0,
                     tokenizer=tiny_model.tokenizer)
    assert not np.array_equal(a.data, c.data)


# ---------------------------------------------------------------------------
# whole-capture runs (reduced length for speed)
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_capture(tmp_path_factory):
    out = tmp_path_factory.mktemp("cap")
    manifest = run_capture(out, n_trials=2, gen_len=48, channel_seed=3,
                           base_seed=1, hidden_size=TEST_HIDDEN)
    return out, manifest


def test_capture_files_and_manifest(small_capture):
    out, manifest = small_capture
    doc = json.loads(manifest.read_text())
    assert len(doc["trials"]) == 10
    assert doc["blocks"] == [1, 4, 7, 10]
    assert doc["per_block_channels"] == 32
    assert "weights=random-init" in doc["notes"]
    for entry in doc["trials"]:
        assert (out / entry["path"]).exists()
        assert "trial_seed" in entry and "prompt_id" in entry


def test_capture_ingested_by_analyzer(small_capture):
    from psidyn import load_manifest, load_manifest_trials

    out, manifest = small_capture
    trials = load_manifest_trials(load_manifest(manifest), out)
    assert len(trials) == 10
    first = trials[0]
    assert (first.t, first.c) == (48, 128)
    assert first.block_ids == (1, 4, 7, 10)
    # channel choice is fixed across every trial of the capture
    for trial in trials[1:]:
        assert trial.channel_indices == first.channel_indices
        assert (trial.t, trial.c) == (48, 128)
    assert first.generation_params["temperature"] == 1.0
    assert first.generation_params["top_k"] == 50


def test_capture_determinism(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        run_capture(out, conditions=("intact_complex",), n_trials=1, gen_len=32,
                    channel_seed=3, base_seed=1, hidden_size=TEST_HIDDEN)
        outs.append((out / "intact_complex-000.psia").read_bytes())
    assert outs[0] == outs[1]


def test_single_condition_capture(tmp_path):
    manifest = run_capture(tmp_path, conditions=("intact_repetition",),
                           n_trials=1, gen_len=32, channel_seed=0, base_seed=0,
                           hidden_size=TEST_HIDDEN)
    doc = json.loads(manifest.read_text())
    assert [e["condition"] for e in doc["trials"]] == ["intact_repetition"]
