"""Deterministic random streams with replayable substreams.

Every source of randomness in the package is a :class:`SeededRng`, keyed by a
``(master_seed, stream_id)`` pair. Two instances with equal keys produce
identical draw sequences, and substream derivation is a pure function of the
key, so independent trials (and the seed-replay prediction of the doubly
stochastic solver) can re-materialize any stream without shared state.
"""

from __future__ import annotations

import numpy as np

from .validation import as_float_vector, check_nonnegative

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(v: int) -> int:
    # Bijective 64-bit mixer; used only for substream key derivation.
    v = (v + _GOLDEN) & _MASK64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _MASK64
    return v ^ (v >> 31)


def substream_id(stream_id: int, index: int) -> int:
    """Derive the stream id of substream ``index``; pure in its arguments."""
    if index < 0:
        raise ValueError(f"substream index must be >= 0, got {index}")
    return _splitmix64((stream_id & _MASK64) ^ _splitmix64(index + 1))


class SeededRng:
    """Counter-based (Philox) random stream keyed by (master_seed, stream_id)."""

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def substream(self, index: int) -> "SeededRng":
        """Fresh stream for substream ``index``; does not consume this stream."""
        return SeededRng(self.master_seed, substream_id(self.stream_id, index))

    # Thin draw helpers so callers never touch numpy's stateful API directly.

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def permutation(self, n):
        return self.generator.permutation(n)

    def choice_rows(self, cumulative, rows=None, size=None):
        """Categorical draws from row-wise cumulative probability tables.

        ``cumulative`` is (k,) or (n, k) with nondecreasing rows ending at ~1.
        With ``rows`` given, row ``rows[i]`` drives draw ``i``.
        """
        cumulative = np.atleast_2d(np.asarray(cumulative, dtype=np.float64))
        if rows is None:
            n = size if size is not None else cumulative.shape[0]
            rows = np.zeros(n, dtype=np.intp) if cumulative.shape[0] == 1 else np.arange(n)
        rows = np.asarray(rows, dtype=np.intp)
        u = self.generator.random(rows.shape[0])
        table = cumulative[rows]
        idx = (u[:, None] > table).sum(axis=1)
        return np.minimum(idx, cumulative.shape[1] - 1)

    def __repr__(self):
        return f"SeededRng(master_seed={self.master_seed}, stream_id={self.stream_id})"


def gaussian_draw(rng: SeededRng, mean, variance: float) -> np.ndarray:
    """I.i.d. normal vector with the given per-component mean and variance.

    ``variance == 0`` returns the mean exactly (degenerate distribution).
    """
    mean = as_float_vector(mean, "mean")
    check_nonnegative(variance, "variance")
    if variance == 0.0:
        return mean.copy()
    return mean + np.sqrt(variance) * rng.standard_normal(mean.shape[0])
