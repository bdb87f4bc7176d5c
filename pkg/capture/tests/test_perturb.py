import copy

import pytest
import torch

from psidyn_capture import (
    CaptureConfigError,
    apply_head_pruning,
    apply_weight_noise,
    iter_noise_targets,
)
from psidyn_capture.conditions import NoiseSpec, PruneSpec


# ---------------------------------------------------------------------------
# weight noise
# ---------------------------------------------------------------------------


def test_noise_magnitude_per_matrix(tiny_model):
    model = copy.deepcopy(tiny_model.model)
    before = {n: w.clone() for n, w in iter_noise_targets(model, (20, 21, 22, 23))}
    assert len(before) == 16  # 4 blocks x (c_attn, attn c_proj, c_fc, mlp c_proj)
    apply_weight_noise(model, NoiseSpec(), seed=3)
    for name, weight in iter_noise_targets(model, (20, 21, 22, 23)):
        ratio = (weight - before[name]).std().item() / before[name].std().item()
        assert abs(ratio - 0.1) <= 0.01, (name, ratio)


def test_noise_only_touches_listed_blocks(tiny_model):
    model = copy.deepcopy(tiny_model.model)
    outside = {n: w.clone() for n, w in iter_noise_targets(model, tuple(range(20)))}
    apply_weight_noise(model, NoiseSpec(), seed=3)
    for name, weight in iter_noise_targets(model, tuple(range(20))):
        assert torch.equal(weight, outside[name]), name


def test_zero_scale_is_identity(tiny_model):
    model = copy.deepcopy(tiny_model.model)
    before = {n: w.clone() for n, w in iter_noise_targets(model, (20, 21))}
    apply_weight_noise(model, NoiseSpec(blocks=(20, 21), sigma_scale=0.0), seed=3)
    for name, weight in iter_noise_targets(model, (20, 21)):
        assert torch.equal(weight, before[name])


def test_noise_determinism(tiny_model):
    weights = []
    for _ in range(2):
        model = copy.deepcopy(tiny_model.model)
        apply_weight_noise(model, NoiseSpec(), seed=11)
        weights.append(model.transformer.h[22].attn.c_attn.weight.clone())
    assert torch.equal(weights[0], weights[1])
    model = copy.deepcopy(tiny_model.model)
    apply_weight_noise(model, NoiseSpec(), seed=12)
    assert not torch.equal(weights[0], model.transformer.h[22].attn.c_attn.weight)


def test_noise_block_range_checked(tiny_model):
    model = copy.deepcopy(tiny_model.model)
    with pytest.raises(CaptureConfigError):
        apply_weight_noise(model, NoiseSpec(blocks=(99,)), seed=0)


# ---------------------------------------------------------------------------
# head pruning
# ---------------------------------------------------------------------------


def _value_columns(hidden: int, n_heads: int, head: int) -> slice:
    head_dim = hidden // n_heads
    start = 2 * hidden + head * head_dim
    return slice(start, start + head_dim)


def test_removed_head_value_path_is_dead(tiny_model):
    model = copy.deepcopy(tiny_model.model)
    apply_head_pruning(model, PruneSpec())
    block = model.transformer.h[20]
    hidden = tiny_model.hidden_size
    x = torch.randn(1, 6, hidden, generator=torch.Generator().manual_seed(1))
    gen = torch.Generator().manual_seed(2)
    with torch.no_grad():
        base = block(x)[0].clone()
        # value path of a removed head: no effect at all
        cols = _value_columns(hidden, tiny_model.n_heads, head=7)
        block.attn.c_attn.weight[:, cols] += torch.randn(
            hidden, cols.stop - cols.start, generator=gen
        )
        after_removed = block(x)[0].clone()
        assert (base - after_removed).abs().max().item() <= 1e-5
        # value path of a kept head: clear effect (positive control)
        cols = _value_columns(hidden, tiny_model.n_heads, head=1)
        block.attn.c_attn.weight[:, cols] += torch.randn(
            hidden, cols.stop - cols.start, generator=gen
        )
        after_kept = block(x)[0].clone()
        assert (after_removed - after_kept).abs().max().item() > 0.1


def test_pruning_only_affects_listed_blocks(tiny_model):
    intact = tiny_model.model
    pruned = apply_head_pruning(copy.deepcopy(intact), PruneSpec())
    ids = torch.arange(12).unsqueeze(0)
    with torch.no_grad():
        a = intact(ids, output_hidden_states=True).hidden_states
        b = pruned(ids, output_hidden_states=True).hidden_states
    # hidden_states[k] is the output of 0-based block k-1; blocks below
    # 20 must be bit-identical, the perturbed top blocks must differ
    for k in range(0, 21):
        assert torch.equal(a[k], b[k]), f"hidden state {k} changed"
    assert not torch.equal(a[21], b[21])
    assert not torch.equal(a[24], b[24])


def test_keep_all_heads_is_identity(tiny_model):
    intact = tiny_model.model
    same = apply_head_pruning(copy.deepcopy(intact),
                              PruneSpec(keep_heads=tuple(range(16))))
    ids = torch.arange(8).unsqueeze(0)
    with torch.no_grad():
        a = intact(ids).logits
        b = same(ids).logits
    assert torch.equal(a, b)


def test_prune_range_checks(tiny_model):
    model = copy.deepcopy(tiny_model.model)
    with pytest.raises(CaptureConfigError):
        apply_head_pruning(model, PruneSpec(blocks=(30,)))
    with pytest.raises(CaptureConfigError):
        apply_head_pruning(model, PruneSpec(keep_heads=(0, 99)))
