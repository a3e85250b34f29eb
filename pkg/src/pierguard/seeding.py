"""Deterministic sub-seed derivation for datasets and benchmark suites."""

from __future__ import annotations

import hashlib


def derive_seed(*parts) -> int:
    """Hash heterogeneous parts into a stable 63-bit RNG seed.

    Keeps trial seeds independent of iteration order: the seed depends only on
    the identifying tuple, not on how many other trials ran before it.
    """
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1
