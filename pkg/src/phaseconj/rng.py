"""Counter-based random streams.

A stream is the pair ``(seed, stream_id)``, used directly as the 128-bit
Philox key. Shot ``s`` of a stream always maps to the same counter block, so
any shot range can be drawn independently and in any order; splitting work
across threads never changes the numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InvalidParameter

_MASK64 = (1 << 64) - 1


def _check_u64(name, value):
    if not isinstance(value, (int, np.integer)) or not 0 <= int(value) <= _MASK64:
        raise InvalidParameter(f"{name} must be an integer in [0, 2**64); got {value!r}")
    return int(value)


def mix64(*words: int) -> int:
    """SplitMix64-style hash of a tuple of 64-bit words, for deriving stream ids."""
    h = 0x9E3779B97F4A7C15
    for w in words:
        h = (h ^ (int(w) & _MASK64)) & _MASK64
        h = (h + 0x9E3779B97F4A7C15) & _MASK64
        h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & _MASK64
        h ^= h >> 31
    return h


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", _check_u64("seed", self.seed))
        object.__setattr__(self, "stream_id", _check_u64("stream_id", self.stream_id))

    def substream(self, *labels: int) -> "RngStream":
        return RngStream(self.seed, mix64(self.stream_id, *labels))

    def normals(self, start: int, n: int, m: int, backend=None) -> np.ndarray:
        """Standard normals for shots ``start .. start + n - 1``, shape ``(n, m)``."""
        k = _kernels(backend)
        _check_range(start, n, m)
        return k.standard_normals(self.seed, self.stream_id, start, n, m)

    def affine_moments(self, start, n, offset, B, backend=None):
        """Mean and scatter matrix of ``offset + B z`` over shots ``start .. start+n-1``."""
        k = _kernels(backend)
        B = np.atleast_2d(np.asarray(B, dtype=float))
        _check_range(start, n, B.shape[1])
        return k.affine_moments(self.seed, self.stream_id, start, n, offset, B)


def _kernels(backend):
    return _backend.kernels if backend is None else _backend.load(backend)


def _check_range(start, n, m):
    if start < 0 or n < 0 or m < 1:
        raise InvalidParameter(f"invalid shot range start={start} n={n} m={m}")
    bps = (m + 3) // 4
    if (start + n) * bps > _MASK64:
        raise InvalidParameter("shot range exceeds the 64-bit counter space")
