"""Checkpoint file format: JSON manifest + raw little-endian float64 payload.

Layout: 8-byte little-endian manifest length, UTF-8 JSON manifest
{"version": "scanb-ckpt-1", "params": [[name, shape], ...]}, then each
parameter's values as raw little-endian 64-bit floats in manifest order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .optim import Parameter

CKPT_VERSION = "scanb-ckpt-1"


class CheckpointError(Exception):
    """Malformed checkpoint or version/shape mismatch."""


def save_checkpoint(path, params: list[Parameter]) -> None:
    manifest = {"version": CKPT_VERSION, "params": [[p.name, list(p.shape)] for p in params]}
    header = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for p in params:
            fh.write(np.ascontiguousarray(p.data, dtype="<f8").tobytes())


def load_checkpoint(path) -> dict[str, np.ndarray]:
    """Read a checkpoint into {name: array}; raises CheckpointError on any mismatch."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 8:
        raise CheckpointError(f"{path}: truncated header")
    (header_len,) = struct.unpack("<Q", raw[:8])
    if len(raw) < 8 + header_len:
        raise CheckpointError(f"{path}: truncated manifest")
    try:
        manifest = json.loads(raw[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable manifest: {exc}") from exc
    version = manifest.get("version")
    if version != CKPT_VERSION:
        raise CheckpointError(f"{path}: version {version!r}, expected {CKPT_VERSION!r}")
    out: dict[str, np.ndarray] = {}
    offset = 8 + header_len
    for name, shape in manifest["params"]:
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(raw):
            raise CheckpointError(f"{path}: truncated payload at parameter {name}")
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        out[name] = arr.astype(np.float64).reshape(shape)
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes")
    return out


def load_into(path, params: list[Parameter]) -> None:
    """Load values into existing parameters; names and shapes must match exactly."""
    values = load_checkpoint(path)
    names = [p.name for p in params]
    if sorted(values) != sorted(names):
        missing = sorted(set(names) - set(values))
        extra = sorted(set(values) - set(names))
        raise CheckpointError(f"parameter set mismatch: missing={missing}, extra={extra}")
    for p in params:
        arr = values[p.name]
        if arr.shape != p.shape:
            raise CheckpointError(f"{p.name}: shape {arr.shape} != expected {p.shape}")
        p.data[...] = arr
