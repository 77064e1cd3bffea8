"""Deterministic random-stream derivation.

One root seed drives a whole experiment. Every consumer (trial, generation,
mutation step, analysis pass) gets its own stream derived from the root seed
plus a structural path, so results do not depend on evaluation order or on
how many workers are running.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _path_word(item: int | str) -> int:
    if isinstance(item, (int, np.integer)):
        return int(item) & _MASK64
    digest = hashlib.sha256(str(item).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def seed_sequence(root_seed: int, *path: int | str) -> np.random.SeedSequence:
    entropy = [int(root_seed) & _MASK64] + [_path_word(p) for p in path]
    return np.random.SeedSequence(entropy)


def derive_rng(root_seed: int, *path: int | str) -> np.random.Generator:
    """Generator for the stream identified by (root_seed, *path)."""
    return np.random.Generator(np.random.PCG64(seed_sequence(root_seed, *path)))


def derive_seed(root_seed: int, *path: int | str) -> int:
    """64-bit sub-seed for the stream identified by (root_seed, *path)."""
    return int(seed_sequence(root_seed, *path).generate_state(1, np.uint64)[0])
