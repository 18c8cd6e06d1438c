"""Seed derivation: one run-level seed, independent streams per stage/job."""
import zlib

import numpy as np


def _key(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def derive_rng(seed, *keys):
    """Return a Generator for ``(seed, *keys)``.

    The same key path always yields the same stream, whatever order the
    callers run in, so parallel jobs stay reproducible.
    """
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=tuple(_key(k) for k in keys))
    return np.random.default_rng(ss)
