"""Deterministic seed derivation.

Every random stream in the package is keyed by a tuple such as
``(seed, restart)`` or ``(seed, lambda0, lambda1, run)`` so results do not
depend on execution order or thread count.
"""

import struct

import numpy as np


def _entropy_word(part):
    if isinstance(part, (bool, np.bool_)):
        return int(part)
    if isinstance(part, (int, np.integer)):
        value = int(part)
        if value < 0:
            value += 1 << 64
        return value
    if isinstance(part, (float, np.floating)):
        return struct.unpack("<Q", struct.pack("<d", float(part)))[0]
    if isinstance(part, str):
        return int.from_bytes(part.encode("utf-8"), "little")
    raise TypeError(f"cannot derive a seed from {type(part).__name__}")


def derive_seed(*parts):
    """32-bit seed hashed from integers, floats and strings."""
    seq = np.random.SeedSequence([_entropy_word(p) for p in parts])
    return int(seq.generate_state(1, dtype=np.uint32)[0])
