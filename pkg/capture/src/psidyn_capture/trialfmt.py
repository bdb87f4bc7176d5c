"""Writer for the analyzer's trial file and manifest formats.

Implemented against the published wire format (magic ``PSIA`` |
version u16 = 1 | T u32 | C u32 | metadata_len u32 | metadata JSON |
T*C float32 row-major little-endian), so this package needs nothing
from the analyzer at runtime; the analyzer round-trip is exercised in
the tests instead.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"PSIA"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIII")


def write_trial(
    path,
    data: np.ndarray,
    trial_id: str,
    condition: str,
    block_ids,
    channel_indices,
    seed: int,
    generation_params: dict,
) -> None:
    data = np.asarray(data, dtype=np.float64)
    t, c = data.shape
    if len(channel_indices) != c:
        raise ValueError(f"{len(channel_indices)} channel indices for {c} channels")
    if not np.all(np.isfinite(data)):
        raise ValueError(f"trial {trial_id}: non-finite activations")
    meta = json.dumps(
        {
            "trial_id": trial_id,
            "condition": condition,
            "block_ids": [int(b) for b in block_ids],
            "channel_indices": [int(i) for i in channel_indices],
            "seed": int(seed),
            "generation_params": generation_params,
        }
    ).encode("utf-8")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, t, c, len(meta))
    payload = data.astype("<f4").tobytes(order="C")
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(header + meta + payload)
    tmp.replace(path)  # atomic publish


def write_manifest(path, entries: list[dict], channel_seed: int,
                   blocks, per_block_channels: int, notes: str) -> None:
    doc = {
        "trials": entries,
        "channel_seed": int(channel_seed),
        "blocks": [int(b) for b in blocks],
        "per_block_channels": int(per_block_channels),
        "notes": notes,
    }
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    tmp.replace(path)
