"""Deterministic, index-addressed random substreams.

Every estimator draws from a counter-based Philox stream keyed by
``(seed, path)``, where ``path`` is a small tuple of integers naming the role
of the stream (centers, partner points, Monte Carlo samples, ...).  Draw ``i``
of a stream is a pure function of the seed, the path and ``i``, never of how
many draws happened before it.  Splitting an index range across worker threads
therefore reproduces the exact same values in any order, which is what makes
reports byte-identical regardless of ``--workers``.
"""

from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1


def _fold(path: tuple[int, ...]) -> int:
    # splitmix64-style accumulation; stable across platforms and versions
    h = 0xA0761D6478BD642F
    for p in path:
        h = (h ^ (p & _M64)) & _M64
        h = (h + 0x9E3779B97F4A7C15) & _M64
        h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9 & _M64
        h = (h ^ (h >> 27)) * 0x94D049BB133111EB & _M64
        h = h ^ (h >> 31)
    return h


class Substream:
    """One logical random stream addressed by (seed, path)."""

    __slots__ = ("seed", "path", "_key")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed) & _M64
        self.path = tuple(int(p) for p in path)
        self._key = np.array([self.seed, _fold(self.path)], dtype=np.uint64)

    def child(self, *path: int) -> "Substream":
        """Derive an independent stream for a sub-role."""
        return Substream(self.seed, self.path + path)

    def __repr__(self) -> str:
        return f"Substream(seed={self.seed}, path={self.path})"

    def words(self, start: int, count: int) -> np.ndarray:
        """64-bit words ``start .. start+count`` of this stream."""
        if count <= 0:
            return np.empty(0, dtype=np.uint64)
        block, offset = divmod(start, 4)
        counter = np.array([block, 0, 0, 0], dtype=np.uint64)
        bg = np.random.Philox(key=self._key, counter=counter)
        raw = bg.random_raw(offset + count)
        return raw[offset:]

    def numerators(self, bits: int, start: int, count: int) -> list[int]:
        """``count`` uniform integers in [0, 2**bits), items ``start`` on."""
        wpi = (bits + 63) // 64
        words = self.words(start * wpi, count * wpi)
        buf = words.astype("<u8").tobytes()
        mask = (1 << bits) - 1
        n = 8 * wpi
        return [int.from_bytes(buf[i * n:(i + 1) * n], "little") & mask
                for i in range(count)]

    def uniforms(self, start: int, count: int) -> np.ndarray:
        """float64 uniforms in [0, 1), one word each."""
        return (self.words(start, count) >> np.uint64(11)) * 2.0 ** -53

    def integers(self, upper: int, start: int, count: int) -> np.ndarray:
        """Integers in [0, upper) via the uniform floats (upper must be small)."""
        vals = (self.uniforms(start, count) * upper).astype(np.int64)
        return np.minimum(vals, upper - 1)
