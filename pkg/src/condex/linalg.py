"""Dense regularized solves for oracles and embedding baselines."""

from __future__ import annotations

import numpy as np
from scipy import linalg as sla

from .exceptions import NumericalError
from .validation import check_positive, check_square

# Cholesky jitter ladder: near-duplicate support points make Gram matrices
# numerically singular; escalate before declaring failure.
_JITTERS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)

_RESIDUAL_TOL = 1e-8


class RegularizedFactor:
    """Cached Cholesky factor of (A + lam*m*I), with the jitter ladder.

    ``solve(B)`` then answers repeated right-hand sides; each solve verifies
    the residual against the unjittered system.
    """

    def __init__(self, a, lam: float):
        a = check_square(a, "A")
        check_positive(lam, "lam")
        m = a.shape[0]
        self.system = a + (lam * m) * np.eye(m)
        self._factor = None
        for jitter in _JITTERS:
            try:
                self._factor = sla.cho_factor(
                    self.system + jitter * np.eye(m), lower=True
                )
                break
            except sla.LinAlgError:
                continue
        if self._factor is None:
            raise NumericalError(
                f"factorization failed after jitter escalation to {_JITTERS[-1]:g}"
            )

    def solve(self, b) -> np.ndarray:
        b_in = np.asarray(b, dtype=np.float64)
        squeeze = b_in.ndim == 1
        if squeeze:
            b_in = b_in.reshape(-1, 1)
        if b_in.ndim != 2:
            raise ValueError(f"B must be a vector or matrix, got shape {b_in.shape}")
        if b_in.shape[0] != self.system.shape[0]:
            raise ValueError(
                f"B has {b_in.shape[0]} rows, expected {self.system.shape[0]}"
            )
        x = sla.cho_solve(self._factor, b_in)
        residual = np.linalg.norm(self.system @ x - b_in)
        b_norm = np.linalg.norm(b_in)
        if residual > _RESIDUAL_TOL * max(b_norm, np.finfo(np.float64).tiny):
            raise NumericalError(
                f"regularized solve residual {residual:.3e} exceeds "
                f"{_RESIDUAL_TOL:g} * ||B||"
            )
        return x[:, 0] if squeeze else x


def solve_regularized(a, lam: float, b) -> np.ndarray:
    """Solve (A + lam*m*I) X = B for symmetric PSD A, m = A's row count.

    The returned X satisfies ``||(A + lam*m*I) X - B||_F <= 1e-8 * ||B||_F``;
    a Cholesky jitter ladder up to 1e-6 absorbs semidefinite rounding before
    a :class:`NumericalError` is raised. B may be a vector or a matrix with
    matching row count; the result has B's shape.
    """
    return RegularizedFactor(a, lam).solve(b)


def symmetrize(a) -> np.ndarray:
    a = check_square(a)
    return 0.5 * (a + a.T)
