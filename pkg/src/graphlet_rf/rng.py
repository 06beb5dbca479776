"""Reproducible random-number streams.

All randomness in the package flows through :class:`RngStream`, a thin
wrapper around the counter-based Philox-4x64 generator keyed by a
``(seed, stream)`` pair.  Identical triples ``(algorithm, seed, stream)``
produce identical sequences on every platform, and a batched draw of
``n`` uniforms consumes the stream exactly like ``n`` scalar draws, so
vectorized and loop code paths stay bit-identical.

Gaussian variates are produced by an explicit Box-Muller transform on
the uniform stream rather than the generator's own normal method, so the
mapping from the uniform sequence to normals is pinned by this module.
"""

from __future__ import annotations

import math

import numpy as np

ALGORITHM = "philox4x64"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    """One round of the splitmix64 mixer; used to derive child stream ids."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


class RngStream:
    """A deterministic uniform/normal stream identified by (seed, stream)."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=[self.seed, self.stream]))

    def derive(self, index: int) -> "RngStream":
        """Child stream for unit `index`; independent of draw order on self."""
        child = _splitmix64((self.stream * _GOLDEN + index + 1) & _MASK64)
        return RngStream(self.seed, child)

    def uniform(self, n: int | None = None):
        """Uniforms in [0, 1); scalar if `n` is None, else ndarray of shape (n,)."""
        if n is None:
            return float(self._gen.random())
        return self._gen.random(int(n))

    def normal(self, n: int) -> np.ndarray:
        """`n` standard normals via Box-Muller on the uniform stream."""
        pairs = (int(n) + 1) // 2
        u = self._gen.random(2 * pairs)
        u1 = u[:pairs]
        u2 = u[pairs:]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = 2.0 * math.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return z[: int(n)]

    def __repr__(self) -> str:
        return f"RngStream({ALGORITHM}, seed={self.seed}, stream={self.stream})"
