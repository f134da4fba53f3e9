"""Kernel functions, Gram matrices, and median-heuristic bandwidths.

Conventions: the Gaussian kernel is ``exp(-||x - x'||^2 / (2 sigma^2))`` and
the Laplacian is ``exp(-||x - x'||_1 / sigma)``, so larger ``sigma`` always
means a wider kernel. Both are unit on the diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .exceptions import DegenerateDataError
from .rng import SeededRng
from .validation import as_float_matrix, as_float_vector, check_same_dim

GAUSSIAN = "gaussian"
LAPLACIAN = "laplacian"

# Pairwise-distance cost cap for the median heuristic.
_MEDIAN_SUBSAMPLE = 2000
_MEDIAN_SUBSAMPLE_SEED = 0x6D656469  # fixed: keeps the heuristic deterministic


@dataclass(frozen=True)
class Kernel:
    """A unit-diagonal translation-invariant kernel: family + bandwidth."""

    family: str
    bandwidth: float

    def __post_init__(self):
        if self.family not in (GAUSSIAN, LAPLACIAN):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")

    def __call__(self, x, x2) -> float:
        return kernel_eval(self, x, x2)


def gaussian(bandwidth: float) -> Kernel:
    return Kernel(GAUSSIAN, bandwidth)


def laplacian(bandwidth: float) -> Kernel:
    return Kernel(LAPLACIAN, bandwidth)


def kernel_eval(kernel: Kernel, x, x2) -> float:
    """Evaluate k(x, x2) for two single points."""
    x = as_float_vector(x, "x")
    x2 = as_float_vector(x2, "x2")
    check_same_dim(x, x2, "x", "x2")
    d = x - x2
    if kernel.family == GAUSSIAN:
        return float(np.exp(-d @ d / (2.0 * kernel.bandwidth**2)))
    return float(np.exp(-np.abs(d).sum() / kernel.bandwidth))


def cross_gram(kernel: Kernel, x, x2) -> np.ndarray:
    """Kernel matrix k(x_i, x2_j) for two point sets, shape (len(x), len(x2))."""
    x = as_float_matrix(x, "x")
    x2 = as_float_matrix(x2, "x2")
    check_same_dim(x, x2, "x", "x2")
    if kernel.family == GAUSSIAN:
        sq = cdist(x, x2, "sqeuclidean")
        return np.exp(-sq / (2.0 * kernel.bandwidth**2))
    l1 = cdist(x, x2, "cityblock")
    return np.exp(-l1 / kernel.bandwidth)


def gram(kernel: Kernel, x) -> np.ndarray:
    """Symmetric PSD Gram matrix with unit diagonal."""
    x = as_float_matrix(x, "X")
    if x.shape[0] == 0:
        raise ValueError("X must be nonempty")
    g = cross_gram(kernel, x, x)
    # exact symmetry + unit diagonal despite floating-point distance noise
    g = 0.5 * (g + g.T)
    np.fill_diagonal(g, 1.0)
    return g


def median_bandwidth(x, coeff: float = 1.0) -> float:
    """``coeff`` times the median pairwise Euclidean distance of the points.

    Exhaustive up to 2000 points, else computed on a seeded subsample of 2000.
    Raises :class:`DegenerateDataError` when all points coincide.
    """
    x = as_float_matrix(x, "X")
    if x.shape[0] < 2:
        raise ValueError("median_bandwidth needs at least 2 points")
    if not coeff > 0:
        raise ValueError(f"coeff must be > 0, got {coeff}")
    if x.shape[0] > _MEDIAN_SUBSAMPLE:
        rng = SeededRng(_MEDIAN_SUBSAMPLE_SEED)
        idx = rng.permutation(x.shape[0])[:_MEDIAN_SUBSAMPLE]
        x = x[np.sort(idx)]
    med = float(np.median(pdist(x)))
    if med == 0.0:
        raise DegenerateDataError("all points identical: median distance is 0")
    return coeff * med
