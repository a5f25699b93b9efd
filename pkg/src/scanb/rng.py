"""Seeded RNG derivation. All randomness in the library flows through here."""

from __future__ import annotations

import hashlib

import numpy as np


def _key_ints(key) -> list[int]:
    if isinstance(key, (int, np.integer)):
        return [int(key) & 0xFFFFFFFF, (int(key) >> 32) & 0xFFFFFFFF]
    if isinstance(key, str):
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    raise TypeError(f"rng key must be int or str, got {type(key).__name__}")


def seed_sequence(*keys) -> np.random.SeedSequence:
    """Build a SeedSequence from a tuple of ints/strings, stable across runs."""
    entropy: list[int] = []
    for key in keys:
        entropy.extend(_key_ints(key))
    return np.random.SeedSequence(entropy)


def rng_for(*keys) -> np.random.Generator:
    """Deterministic Generator for a hierarchical key, e.g. rng_for(seed, "spawn", env_id)."""
    return np.random.default_rng(seed_sequence(*keys))
