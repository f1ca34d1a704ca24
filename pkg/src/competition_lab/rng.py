"""Seeded random streams.

Every replica owns a 64-bit seed derived as ``splitmix64(master ^ index)``.
Sub-streams (boundary arms, weights, exclusion events) are derived the same
way from the replica seed, so a replica can be replayed from its seed alone.

Site weights are counter-based: the weight of lattice site ``(x, y)`` is a
pure function of ``(seed, x, y)``.  Enlarging a simulation box therefore
never changes the weights already used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_OFFSET = 1 << 31
TWO_M53 = 2.0**-53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state ``x``."""
    return mix64((x + GAMMA) & MASK64)


def site_index(x: int, y: int) -> int:
    return (((x + _OFFSET) & 0xFFFFFFFF) << 32) | ((y + _OFFSET) & 0xFFFFFFFF)


def site_weight(seed: int, x: int, y: int) -> float:
    """Exp(1) weight of site (x, y) as ``-log(v)`` with ``v = 1 - u`` in (0, 1).

    ``v = (2k + 1) 2^-53`` for a 52-bit ``k`` is exact in binary64, so the
    compiled kernel reproduces this value bit for bit.
    """
    bits = mix64(seed + GAMMA * (site_index(x, y) + 1))
    return -math.log(((bits >> 12) * 2 + 1) * TWO_M53)


def site_weights_block(seed: int, x0: int, x1: int, y0: int, y1: int) -> np.ndarray:
    """Weights of the rectangle ``[x0, x1] x [y0, y1]`` as a ``(rows, cols)`` array.

    Hashing is vectorised; the logarithm goes through :func:`math.log` so the
    values match :func:`site_weight` exactly.
    """
    xs = np.arange(x0, x1 + 1, dtype=np.int64)
    ys = np.arange(y0, y1 + 1, dtype=np.int64)
    hi = ((xs + _OFFSET) & 0xFFFFFFFF).astype(np.uint64) << np.uint64(32)
    lo = ((ys + _OFFSET) & 0xFFFFFFFF).astype(np.uint64)
    idx = hi[None, :] | lo[:, None]
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + np.uint64(GAMMA) * (idx + np.uint64(1))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    v = ((z >> np.uint64(12)) * np.uint64(2) + np.uint64(1)).astype(np.float64) * TWO_M53
    out = np.fromiter(map(math.log, v.ravel()), dtype=np.float64, count=v.size)
    return np.negative(out, out=out).reshape(v.shape)


@dataclass(frozen=True)
class RngStream:
    """A named 64-bit seed; children and generators are derived from it."""

    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", int(self.seed) & MASK64)

    def child(self, key: int) -> "RngStream":
        return RngStream(splitmix64(self.seed ^ key))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


def replica_stream(master_seed: int, index: int) -> RngStream:
    return RngStream(splitmix64((master_seed & MASK64) ^ index))


# fixed child keys, one per consumer
ARM_NEG = 1
ARM_POS = 2
WEIGHTS = 3
TASEP_INIT = 4
TASEP_EVENTS = 5
AUX = 6
