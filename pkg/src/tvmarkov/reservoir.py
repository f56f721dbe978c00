"""Counter-addressed uniform random reservoir.

Every uniform is a pure function of (seed, stream, k, j, i), so coupled
chains can consume the same randomness at the same addresses without any
sequential generator state. The mixer is the SplitMix64 finalizer applied
to a Weyl-style combination of the address words.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_C_K = np.uint64(0xD1342543DE82EF95)
_C_J = np.uint64(0xA0761D6478BD642F)
_C_I = np.uint64(0xE7037ED1A0B428DB)
_INV53 = float(2.0 ** -53)


def _splitmix(x: np.ndarray) -> np.ndarray:
    x = (x + _GOLDEN) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(30)
    x *= _MIX1
    x ^= x >> np.uint64(27)
    x *= _MIX2
    x ^= x >> np.uint64(31)
    return x


@dataclass(frozen=True)
class NoiseReservoir:
    """Addressable source of iid uniforms U^{(k)}_{j,i}.

    ``stream`` separates independent replicate paths under the same seed;
    ``k`` is the time index (may be negative, e.g. burn-in), ``j`` a slot
    within the step and ``i`` a within-slot counter.
    """

    seed: int
    stream: int = 0

    def _base(self) -> np.uint64:
        s = _splitmix(np.uint64(np.int64(self.seed)).reshape(1))[0]
        return _splitmix((s ^ (np.uint64(np.int64(self.stream)) * _GOLDEN)).reshape(1))[0]

    def uniforms(self, k, j, i) -> np.ndarray:
        """Uniform(0, 1) values at broadcast addresses (k, j, i)."""
        k = np.asarray(k, dtype=np.int64).astype(np.uint64)
        j = np.asarray(j, dtype=np.int64).astype(np.uint64)
        i = np.asarray(i, dtype=np.int64).astype(np.uint64)
        with np.errstate(over="ignore"):
            word = self._base() ^ (k * _C_K) ^ (j * _C_J) ^ (i * _C_I)
            word = _splitmix(_splitmix(np.atleast_1d(word)))
        out = ((word >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53
        shape = np.broadcast_shapes(np.shape(k), np.shape(j), np.shape(i))
        return out.reshape(shape) if shape else out.reshape(())

    def uniform(self, k: int, j: int, i: int) -> float:
        return float(self.uniforms(k, j, i))

    def with_stream(self, stream: int) -> "NoiseReservoir":
        return NoiseReservoir(seed=self.seed, stream=stream)


def stream_uniforms(seed: int, streams, k, j, i) -> np.ndarray:
    """Uniforms for many replicate streams at once, shape (len(streams), ...).

    Equivalent to stacking ``NoiseReservoir(seed, s).uniforms(k, j, i)`` over
    ``s`` in ``streams`` but vectorized over the stream axis as well.
    """
    streams = np.asarray(streams, dtype=np.int64).astype(np.uint64)
    s0 = _splitmix(np.uint64(np.int64(seed)).reshape(1))[0]
    with np.errstate(over="ignore"):
        bases = _splitmix(s0 ^ (streams * _GOLDEN))
        k = np.asarray(k, dtype=np.int64).astype(np.uint64)
        j = np.asarray(j, dtype=np.int64).astype(np.uint64)
        i = np.asarray(i, dtype=np.int64).astype(np.uint64)
        addr = (k * _C_K) ^ (j * _C_J) ^ (i * _C_I)
        word = _splitmix(_splitmix(bases.reshape(bases.shape + (1,) * addr.ndim) ^ addr))
    return ((word >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53
