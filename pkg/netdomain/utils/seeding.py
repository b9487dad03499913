"""Stable seed derivation."""
import hashlib
from typing import Union

import numpy as np

Key = Union[int, str]


def derive_seed(seed: int, *keys: Key) -> int:
    """
    Derive a 63-bit seed from a base seed and any number of keys.

    Uses SHA-256 over the textual keys, so the result is stable across
    processes and interpreter runs (unlike hash()).
    """
    text = "\x1f".join([str(int(seed))] + [str(k) for k in keys])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF


def rng_for(seed: int, *keys: Key) -> np.random.Generator:
    """numpy Generator seeded by derive_seed(seed, *keys)."""
    return np.random.default_rng(derive_seed(seed, *keys))
