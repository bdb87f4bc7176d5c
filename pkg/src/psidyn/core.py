"""Trial data model, file formats, and per-channel preprocessing.

A trial is one multichannel recording: a T x C matrix of activations
(T token steps, C channels) plus provenance. Two on-disk formats are
supported:

* binary (preferred, bit-exact): magic ``PSIA`` | version u16 | T u32 |
  C u32 | metadata_len u32 | metadata JSON (UTF-8) | T*C float32
  payload, row-major little-endian.
* CSV (interop/debugging): header row ``t,ch0,ch1,...`` then one row
  per token step. CSV carries no provenance metadata.

Matrices are stored float32 and handled float64 in memory.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    CorruptionError,
    DataError,
    DegenerateDataError,
    FormatError,
    MetadataError,
)

MAGIC = b"PSIA"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIII")

#: Canonical experimental conditions, in reporting order. Any other
#: non-empty label is treated as a custom condition.
CONDITIONS = (
    "intact_complex",
    "intact_repetition",
    "intact_noisy",
    "damaged_heads",
    "damaged_noise",
)

DEFAULT_BLOCKS = (1, 4, 7, 10)
DEFAULT_PER_BLOCK_CHANNELS = 32

#: A channel whose population sd is at or below this is degenerate.
DEGENERATE_SD = 1e-12


def condition_sort_key(condition: str) -> tuple[int, str]:
    """Sort canonical conditions first in fixed order, then customs."""
    try:
        return (CONDITIONS.index(condition), condition)
    except ValueError:
        return (len(CONDITIONS), condition)


@dataclass(frozen=True)
class ActivationTrial:
    """One recorded trial: activation matrix plus provenance.

    ``data`` has shape (T, C). ``channel_indices`` holds the original
    hidden-state index of each column; when ``block_ids`` is non-empty,
    columns are laid out as equal contiguous segments, one per block.
    An empty ``block_ids`` means block attribution is unavailable
    (e.g. after random channel subsampling).
    """

    trial_id: str
    condition: str
    data: np.ndarray
    block_ids: tuple[int, ...] = ()
    channel_indices: tuple[int, ...] = ()
    seed: int = 0
    generation_params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DataError(f"trial data must be 2-D, got shape {data.shape}")
        t, c = data.shape
        if t < 2 or c < 2:
            raise DataError(f"trial needs T >= 2 and C >= 2, got T={t}, C={c}")
        if not np.all(np.isfinite(data)):
            bad = int(np.argwhere(~np.isfinite(data))[0][1])
            raise DataError(f"non-finite values in trial data (first in channel {bad})")
        if not self.trial_id or not isinstance(self.trial_id, str):
            raise MetadataError("trial_id must be a non-empty string")
        if not self.condition or not isinstance(self.condition, str):
            raise MetadataError("condition must be a non-empty string")
        if self.seed < 0:
            raise MetadataError("seed must be non-negative")

        object.__setattr__(self, "block_ids", tuple(int(b) for b in self.block_ids))
        chans = tuple(int(i) for i in self.channel_indices)
        if not chans:
            chans = tuple(range(c))
        if len(chans) != c:
            raise MetadataError(
                f"channel_indices has {len(chans)} entries for {c} channels"
            )
        if self.block_ids:
            if c % len(self.block_ids) != 0:
                raise MetadataError(
                    f"C={c} not divisible by {len(self.block_ids)} blocks"
                )
            seg = c // len(self.block_ids)
            for k, block in enumerate(self.block_ids):
                segment = chans[k * seg : (k + 1) * seg]
                if len(set(segment)) != seg:
                    raise MetadataError(
                        f"duplicate channel indices within block {block}"
                    )
        object.__setattr__(self, "channel_indices", chans)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "generation_params", dict(self.generation_params))

    @property
    def t(self) -> int:
        return self.data.shape[0]

    @property
    def c(self) -> int:
        return self.data.shape[1]

    def channel_blocks(self) -> np.ndarray:
        """Block id owning each column; requires block attribution."""
        if not self.block_ids:
            raise MetadataError(f"trial {self.trial_id} carries no block attribution")
        seg = self.c // len(self.block_ids)
        return np.repeat(np.asarray(self.block_ids, dtype=int), seg)


@dataclass(frozen=True)
class PreprocessedTrial(ActivationTrial):
    """Trial whose channels are demeaned and scaled to unit variance."""

    def __post_init__(self):
        super().__post_init__()
        mu = self.data.mean(axis=0)
        sd = self.data.std(axis=0)
        if np.abs(mu).max() > 1e-9 or np.abs(sd - 1.0).max() > 1e-6:
            raise DataError("preprocessed trial columns are not z-scored")


def preprocess(trial: ActivationTrial) -> PreprocessedTrial:
    """Demean and z-score every channel over time (population sd).

    Raises DegenerateDataError, naming the offending channel, when a
    channel's sd is at or below 1e-12 (e.g. a fully repetitive
    recording artifact); silent exclusion would change C mid-pipeline.
    """
    data = trial.data
    # column-wise 1-D reductions: matrix reductions round differently
    # depending on column position, breaking permutation symmetry
    mu = np.array([data[:, j].mean() for j in range(trial.c)])
    sd = np.array([data[:, j].std() for j in range(trial.c)])
    dead = np.nonzero(sd <= DEGENERATE_SD)[0]
    if dead.size:
        j = int(dead[0])
        raise DegenerateDataError(
            f"degenerate channel {j} (hidden index "
            f"{trial.channel_indices[j]}) in trial {trial.trial_id}: sd={sd[j]:.3g}"
        )
    z = (data - mu) / sd
    return PreprocessedTrial(
        trial_id=trial.trial_id,
        condition=trial.condition,
        data=z,
        block_ids=trial.block_ids,
        channel_indices=trial.channel_indices,
        seed=trial.seed,
        generation_params=trial.generation_params,
    )


def restrict_channels(
    trial: ActivationTrial,
    columns: Sequence[int],
    block_ids: tuple[int, ...] = (),
) -> ActivationTrial:
    """New trial keeping only the given columns (in the given order).

    Unless the caller passes a consistent ``block_ids`` layout, the
    restricted trial loses block attribution.
    """
    cols = list(int(j) for j in columns)
    if not cols:
        raise MetadataError(f"channel restriction of {trial.trial_id} selects nothing")
    return ActivationTrial(
        trial_id=trial.trial_id,
        condition=trial.condition,
        data=trial.data[:, cols],
        block_ids=block_ids,
        channel_indices=tuple(trial.channel_indices[j] for j in cols),
        seed=trial.seed,
        generation_params=trial.generation_params,
    )


# ---------------------------------------------------------------------------
# binary / CSV trial files
# ---------------------------------------------------------------------------


def _metadata_dict(trial: ActivationTrial) -> dict:
    return {
        "trial_id": trial.trial_id,
        "condition": trial.condition,
        "block_ids": list(trial.block_ids),
        "channel_indices": list(trial.channel_indices),
        "seed": trial.seed,
        "generation_params": dict(trial.generation_params),
    }


def save_trial(trial: ActivationTrial, path, format: str = "binary") -> None:
    """Write a trial to disk (validates before touching the file)."""
    path = Path(path)
    if format == "binary":
        meta = json.dumps(_metadata_dict(trial)).encode("utf-8")
        payload = trial.data.astype("<f4").tobytes(order="C")
        header = _HEADER.pack(MAGIC, FORMAT_VERSION, trial.t, trial.c, len(meta))
        path.write_bytes(header + meta + payload)
    elif format == "csv":
        lines = ["t," + ",".join(f"ch{j}" for j in range(trial.c))]
        quantised = trial.data.astype(np.float32)
        for i in range(trial.t):
            row = ",".join(repr(float(v)) for v in quantised[i])
            lines.append(f"{i},{row}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise FormatError(f"unknown trial format {format!r}")


def _load_binary(raw: bytes, path: Path) -> ActivationTrial:
    if len(raw) < _HEADER.size:
        raise CorruptionError(f"{path}: truncated header")
    magic, version, t, c, meta_len = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    offset = _HEADER.size
    if len(raw) < offset + meta_len:
        raise CorruptionError(f"{path}: truncated metadata")
    try:
        meta = json.loads(raw[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptionError(f"{path}: unreadable metadata ({exc})") from exc
    offset += meta_len
    expected = t * c * 4
    if len(raw) - offset != expected:
        raise CorruptionError(
            f"{path}: payload is {len(raw) - offset} bytes, header "
            f"T={t} C={c} implies {expected}"
        )
    data = np.frombuffer(raw, dtype="<f4", count=t * c, offset=offset)
    data = data.reshape(t, c).astype(np.float64)
    try:
        return ActivationTrial(
            trial_id=meta.get("trial_id", path.stem),
            condition=meta.get("condition", "custom"),
            data=data,
            block_ids=tuple(meta.get("block_ids", ())),
            channel_indices=tuple(meta.get("channel_indices", ())),
            seed=int(meta.get("seed", 0)),
            generation_params=meta.get("generation_params", {}),
        )
    except (TypeError, AttributeError) as exc:
        raise CorruptionError(f"{path}: malformed metadata ({exc})") from exc


def _load_csv(text: str, path: Path) -> ActivationTrial:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split(",")
    c = len(header) - 1
    if c < 2:
        raise FormatError(f"{path}: CSV header declares {c} channels")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != c + 1:
            raise CorruptionError(
                f"{path}: row has {len(cells) - 1} channels, header has {c}"
            )
        try:
            rows.append([float(v) for v in cells[1:]])
        except ValueError as exc:
            raise CorruptionError(f"{path}: unparseable cell ({exc})") from exc
    if len(rows) < 2:
        raise CorruptionError(f"{path}: fewer than 2 data rows")
    return ActivationTrial(
        trial_id=path.stem,
        condition="custom",
        data=np.asarray(rows, dtype=np.float64),
    )


def load_trial(path) -> ActivationTrial:
    """Load a trial from a binary or CSV file (sniffed by content)."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == MAGIC:
        return _load_binary(raw, path)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: not a PSIA binary nor a text file") from None
    if text.lstrip().startswith("t,"):
        return _load_csv(text, path)
    raise FormatError(f"{path}: unrecognised trial format")


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialRef:
    """One manifest entry: a trial file plus its condition label."""

    path: str
    condition: str


@dataclass(frozen=True)
class TrialManifest:
    """Ordered collection of trial references grouped by condition."""

    trials: tuple[TrialRef, ...]
    channel_seed: int = 0
    blocks: tuple[int, ...] = DEFAULT_BLOCKS
    per_block_channels: int = DEFAULT_PER_BLOCK_CHANNELS
    notes: str = ""

    def __post_init__(self):
        object.__setattr__(self, "trials", tuple(self.trials))
        object.__setattr__(self, "blocks", tuple(int(b) for b in self.blocks))
        for ref in self.trials:
            if not ref.condition:
                raise MetadataError(f"manifest entry {ref.path}: empty condition")

    def conditions(self) -> list[str]:
        seen = []
        for ref in self.trials:
            if ref.condition not in seen:
                seen.append(ref.condition)
        return sorted(seen, key=condition_sort_key)


def save_manifest(manifest: TrialManifest, path) -> None:
    doc = {
        "trials": [{"path": r.path, "condition": r.condition} for r in manifest.trials],
        "channel_seed": manifest.channel_seed,
        "blocks": list(manifest.blocks),
        "per_block_channels": manifest.per_block_channels,
        "notes": manifest.notes,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_manifest(path) -> TrialManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid manifest JSON ({exc})") from exc
    if not isinstance(doc, dict) or "trials" not in doc:
        raise FormatError(f"{path}: manifest lacks a 'trials' list")
    refs = []
    for entry in doc["trials"]:
        try:
            refs.append(TrialRef(path=entry["path"], condition=entry["condition"]))
        except (TypeError, KeyError) as exc:
            raise FormatError(f"{path}: malformed trial entry {entry!r}") from exc
    return TrialManifest(
        trials=tuple(refs),
        channel_seed=int(doc.get("channel_seed", 0)),
        blocks=tuple(doc.get("blocks", DEFAULT_BLOCKS)),
        per_block_channels=int(doc.get("per_block_channels", DEFAULT_PER_BLOCK_CHANNELS)),
        notes=str(doc.get("notes", "")),
    )


def load_manifest_trials(manifest: TrialManifest, base_dir) -> list[ActivationTrial]:
    """Load and validate every trial referenced by a manifest.

    The manifest is the grouping authority: its condition label is
    applied to each loaded trial. A binary trial whose embedded
    condition disagrees with the manifest is rejected.
    """
    base = Path(base_dir)
    trials = []
    for ref in manifest.trials:
        p = Path(ref.path)
        if not p.is_absolute():
            p = base / p
        trial = load_trial(p)
        if trial.condition not in ("custom", ref.condition):
            raise MetadataError(
                f"{p}: file says condition {trial.condition!r}, "
                f"manifest says {ref.condition!r}"
            )
        if trial.condition != ref.condition:
            trial = replace(trial, condition=ref.condition)
        trials.append(trial)
    if not trials:
        raise MetadataError("manifest references no trials")
    t0, c0 = trials[0].t, trials[0].c
    for trial in trials[1:]:
        if (trial.t, trial.c) != (t0, c0):
            raise MetadataError(
                f"trial {trial.trial_id} is {trial.t}x{trial.c}, "
                f"expected {t0}x{c0} like the rest of the manifest"
            )
    return trials
