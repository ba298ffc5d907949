"""Counter-based random streams for reproducible parallel sampling.

Every draw is a pure function of (seed, path index, draw index):

    key(path)    = mix64(seed + (path + 1) * GOLDEN)
    bits(key, i) = mix64(key + (i + 1) * GOLDEN)
    uniform      = ((bits >> 11) + 0.5) * 2**-53        in (0, 1)
    normal       = ndtri(uniform)

mix64 is the splitmix64 finalizer (xor-shift-multiply avalanche) and GOLDEN is
the 64-bit golden-ratio increment 0x9E3779B97F4A7C15. Nothing depends on call
order, so any partition of paths or draw ranges across workers reproduces the
same values bit for bit. Normals come from the inverse CDF, never rejection,
so each draw consumes exactly one counter slot.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_MASK = 0xFFFFFFFFFFFFFFFF
_TWO_POW_MINUS_53 = 1.0 / 9007199254740992.0


def mix64(z):
    """splitmix64 finalizer, vectorized over uint64 arrays (wraps mod 2**64)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX_1
        z = (z ^ (z >> np.uint64(27))) * _MIX_2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed, paths):
    """One independent stream key per path index."""
    paths = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        offset = np.uint64(int(seed) & _MASK) + (paths + np.uint64(1)) * GOLDEN
    return mix64(offset)


def uniforms(keys, start, count):
    """Draws start..start+count-1 of each stream, shape keys.shape + (count,)."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        counters = np.asarray(keys, dtype=np.uint64)[..., None] \
            + (idx + np.uint64(1)) * GOLDEN
    bits = mix64(counters)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_POW_MINUS_53


def normals(keys, start, count):
    """Standard normal draws start..start+count-1 of each stream."""
    return ndtri(uniforms(keys, start, count))


def standard_normals(seed, paths, start, count):
    """Convenience wrapper: normals for the given path indices of a seed."""
    return normals(stream_keys(seed, paths), start, count)
