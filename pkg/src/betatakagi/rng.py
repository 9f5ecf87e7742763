"""Counter-based random streams.

Each sample gets its own Philox stream keyed by ``(seed, index)``, so a
sample's randomness does not depend on how work is split across workers.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def stream(seed: int, index: int, tag: int = 0) -> np.random.Generator:
    """Independent generator for sample ``index`` under ``seed``.

    ``tag`` separates unrelated uses of the same (seed, index) pair.
    """
    key = ((seed & _MASK) << 64) | ((tag & 0xFFFF) << 48) | (index & ((1 << 48) - 1))
    return np.random.Generator(np.random.Philox(key=key))


def uniform_bits(gen: np.random.Generator, bits: int) -> int:
    """Uniform integer in ``[0, 2**bits)``."""
    nbytes = (bits + 7) // 8
    return int.from_bytes(gen.bytes(nbytes), "little") >> (8 * nbytes - bits)
