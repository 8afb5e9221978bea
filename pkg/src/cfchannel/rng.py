"""Reproducible random streams.

Every random draw in the package goes through :func:`stream`, which keys a
Philox4x64-10 counter-based generator with a 64-bit seed.  Raw 64-bit words
are converted to doubles here (top 53 bits), so the sequence of uniforms is
fixed by the Philox algorithm alone and does not depend on numpy's
``Generator`` sampling routines, which are allowed to change between
releases.

Seeds for sub-streams are derived with the SplitMix64 finalizer.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_TWO_M53 = 1.0 / (1 << 53)


def splitmix64(x: int) -> int:
    """SplitMix64 output function (a bijection on 64-bit words)."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for sub-stream ``index`` of ``seed``.

    For fixed ``seed`` the map is injective in ``index`` modulo 2**64, and for
    fixed ``index`` it is injective in ``seed``: the pre-image
    ``seed + GOLDEN * (index + 1)`` is injective in either argument because
    ``GOLDEN`` is odd, and the finalizer is a bijection.
    """
    return splitmix64((seed + GOLDEN * (index + 1)) & MASK64)


class Stream:
    """Uniform draws from a Philox stream keyed by a 64-bit seed."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._bitgen = np.random.Philox(key=self.seed)

    def uniform(self, size) -> np.ndarray:
        """Doubles in [0, 1) with 53 bits of resolution."""
        raw = self._bitgen.random_raw(size)
        return (raw >> np.uint64(11)).astype(np.float64) * _TWO_M53

    def integers(self, k: int, size) -> np.ndarray:
        """Integers uniform on 0..k-1 (via ``floor(u * k)``)."""
        out = (self.uniform(size) * k).astype(np.int64)
        # floor(u*k) == k only if rounding pushes u*k up; guard anyway
        np.minimum(out, k - 1, out=out)
        return out


def stream(seed: int) -> Stream:
    return Stream(seed)
