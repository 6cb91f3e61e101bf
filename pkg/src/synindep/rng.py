"""Deterministic random streams.

Every random draw in the package comes from a named substream of a single
64-bit master seed.  A substream is addressed by a purpose tag plus an
optional tuple of integer indices (for example ``("perm",)`` for the
permutation block of one test, or ``("trial", 17)`` for the seventeenth
Monte Carlo trial).  The substream key is a SHA-256 digest of the
``(seed, tag, indices)`` triple, feeding the counter-based Philox
generator, so substreams can be drawn in any order and on any number of
workers with byte-identical results.

Established tags:

====================  =====================================================
``"trial"``           per-trial sub-seed in Monte Carlo drivers
``"innov"``           innovation draws for data generators
``"perm"``            permutation block of a rank test
``"tie"``             tie-break order of a rank test
``"sps-sign"``        Rademacher sign block of one confidence region
``"sps-tie"``         tie-break order of one confidence region
====================  =====================================================
"""

from __future__ import annotations

import hashlib

import numpy as np

_DOMAIN = b"synindep\x00"
_SEED_LIMIT = 2**64


def _digest(seed: int, tag: str, indices: tuple[int, ...]) -> bytes:
    if not 0 <= int(seed) < _SEED_LIMIT:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    msg = bytearray(_DOMAIN)
    msg += int(seed).to_bytes(8, "little")
    msg += tag.encode("utf-8")
    msg += b"\x00"
    for ix in indices:
        if ix < 0:
            raise ValueError(f"stream indices must be non-negative, got {ix}")
        msg += int(ix).to_bytes(8, "little")
    return hashlib.sha256(bytes(msg)).digest()


def stream(seed: int, tag: str, *indices: int) -> np.random.Generator:
    """Return the generator for the substream ``(tag, *indices)`` of ``seed``."""
    key = np.frombuffer(_digest(seed, tag, indices)[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, tag: str, *indices: int) -> int:
    """Collapse a substream address into a fresh unsigned 64-bit seed.

    Used to hand independent sub-seeds to components that take a seed of
    their own (per-trial seeds, per-region sign seeds, ...).
    """
    return int.from_bytes(_digest(seed, tag, indices)[:8], "little")
