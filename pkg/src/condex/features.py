"""Explicit finite-dimensional feature maps.

Two families live here: seeded random Fourier features approximating a
Gaussian kernel (regenerable exactly from ``(kernel, n_features, seed)``), and
exact indicator maps for finite state sets encoded as one-hot vectors. Both
expose ``n_features``, ``input_dim`` and ``transform``; linear models treat
them interchangeably.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .kernels import GAUSSIAN, Kernel
from .rng import SeededRng
from .validation import as_float_matrix


class RandomFourierFeatures(BaseEstimator):
    """Cosine feature map for the Gaussian kernel (Rahimi-Recht style).

    feature_i(x) = sqrt(2/m) * cos(W_i . x + b_i) with W_i ~ N(0, sigma^-2 I)
    and b_i ~ U[0, 2pi). Construction is a pure function of
    (kernel, n_features, input_dim, seed), so maps can be re-materialized.
    """

    def __init__(self, kernel: Kernel, n_features: int, input_dim: int, seed: int):
        if kernel.family != GAUSSIAN:
            raise ValueError(
                f"random Fourier features support the Gaussian family only, got {kernel.family!r}"
            )
        if n_features < 1:
            raise ValueError(f"n_features must be >= 1, got {n_features}")
        self.kernel = kernel
        self.n_features = int(n_features)
        self.input_dim = int(input_dim)
        self.seed = int(seed)
        rng = SeededRng(self.seed)
        self.frequencies_ = rng.standard_normal((self.n_features, self.input_dim)) / kernel.bandwidth
        self.phases_ = rng.uniform(0.0, 2.0 * np.pi, self.n_features)
        self._scale = np.sqrt(2.0 / self.n_features)

    def transform(self, x) -> np.ndarray:
        """Feature matrix of shape (n_points, n_features)."""
        x = as_float_matrix(x, "x")
        if x.shape[1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {x.shape[1]}")
        return self._scale * np.cos(x @ self.frequencies_.T + self.phases_)

    def transform_single(self, x) -> np.ndarray:
        return self.transform(np.asarray(x, dtype=np.float64).reshape(1, -1))[0]

    def kernel_estimate(self, x, x2) -> np.ndarray:
        """Monte-Carlo kernel estimate phi(x) . phi(x2)^T."""
        return self.transform(x) @ self.transform(x2).T


def rff_sample(kernel: Kernel, n_features: int, seed: int, input_dim: int) -> RandomFourierFeatures:
    """Draw a seeded random Fourier feature map approximating ``kernel``."""
    return RandomFourierFeatures(kernel, n_features, input_dim, seed)


def single_random_feature(kernel: Kernel, input_dim: int, seed: int):
    """One (frequency, phase) draw; the m=1 feature is sqrt(2) cos(w.x + b)."""
    fm = RandomFourierFeatures(kernel, 1, input_dim, seed)
    return fm.frequencies_[0], float(fm.phases_[0])


class TabularStateFeatures:
    """Identity map over one-hot state encodings: feature = the input itself.

    Gives an exact universal linear class on a finite state set; used by the
    finite-chain tasks where a sampled kernel approximation would only add
    noise.
    """

    def __init__(self, n_states: int):
        self.n_states = int(n_states)
        self.n_features = self.n_states
        self.input_dim = self.n_states

    def transform(self, x) -> np.ndarray:
        x = as_float_matrix(x, "x")
        if x.shape[1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {x.shape[1]}")
        return x

    def transform_single(self, x) -> np.ndarray:
        return np.asarray(x, dtype=np.float64).copy()


class TabularPairFeatures:
    """Pair-indicator map over concatenated one-hot (s, t) encodings.

    Inputs are length-2n vectors (one-hot s followed by one-hot t); the
    feature is the n^2 indicator of the pair, so a linear model is an
    arbitrary table over pairs.
    """

    def __init__(self, n_states: int):
        self.n_states = int(n_states)
        self.n_features = self.n_states**2
        self.input_dim = 2 * self.n_states

    def transform(self, x) -> np.ndarray:
        x = as_float_matrix(x, "x")
        if x.shape[1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {x.shape[1]}")
        n = self.n_states
        s = np.argmax(x[:, :n], axis=1)
        t = np.argmax(x[:, n:], axis=1)
        out = np.zeros((x.shape[0], self.n_features))
        out[np.arange(x.shape[0]), s * n + t] = 1.0
        return out

    def transform_single(self, x) -> np.ndarray:
        return self.transform(np.asarray(x, dtype=np.float64).reshape(1, -1))[0]
