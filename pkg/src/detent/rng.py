"""Counter-based random streams.

Every random quantity is addressed by ``(seed, draw, stream, counter)``.
The key for a draw is ``splitmix64(splitmix64(seed ^ stream_tag) + draw)``
and the ``j``-th uniform of that draw is ``splitmix64(key + (j+1)*GAMMA)``
mapped to ``[0, 1)`` with 53 bits.  Draws are therefore independent of how
they are batched or split across workers.

``generator`` gives a numpy ``Generator`` (Philox) keyed by the same
per-draw key, for consumers that need an open-ended stream such as random
walks.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1

# stream tags keep unrelated uses of one seed apart
SAMPLE = 1
ORDER = 2
PERCOLATION = 3
THRESHOLD = 4
ROOTS = 5
WALK = 6


def splitmix64(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def draw_keys(seed: int, draws, stream: int = SAMPLE) -> np.ndarray:
    base = splitmix64(np.array([(int(seed) ^ (int(stream) << 56)) & _MASK], dtype=np.uint64))
    d = np.atleast_1d(np.asarray(draws, dtype=np.uint64))
    with np.errstate(over="ignore"):
        return splitmix64(base + d * GAMMA)


def uniforms(seed: int, draws, n: int, stream: int = SAMPLE, offset: int = 0) -> np.ndarray:
    """Array of shape ``(len(draws), n)`` of uniforms in ``[0, 1)``."""
    keys = draw_keys(seed, draws, stream)
    j = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        bits = splitmix64(keys[:, None] + j[None, :] * GAMMA)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def uniforms_at(seed: int, draws, columns, stream: int = SAMPLE) -> np.ndarray:
    """Like ``uniforms`` but only at the given counter positions ``columns``."""
    keys = draw_keys(seed, draws, stream)
    j = np.asarray(columns, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        bits = splitmix64(keys[:, None] + j[None, :] * GAMMA)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def generator(seed: int, draw: int = 0, stream: int = WALK) -> np.random.Generator:
    key = int(draw_keys(seed, [draw], stream)[0])
    return np.random.Generator(np.random.Philox(key=[key, int(seed) & _MASK]))
