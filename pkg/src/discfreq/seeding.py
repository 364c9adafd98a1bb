"""Stable seed derivation.

Every random decision in the package is driven by a ``random.Random`` seeded
from a hash of ``(seed, label, ...)``.  Python's builtin ``hash`` is salted per
process, so blake2b is used instead to keep runs reproducible across processes.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(*parts: object) -> int:
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "big")


def derive_rng(*parts: object) -> random.Random:
    return random.Random(derive_seed(*parts))


def rank_key(seed: int, v: int) -> int:
    """Priority of vertex ``v``; ties are impossible since the low bits carry ``v``."""
    return (derive_seed(seed, "rank", v) << 32) | v
