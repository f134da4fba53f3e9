"""Tiny enumerable task powering the gap certificate and unbiasedness checks.

Three x atoms with fixed probabilities, two z atoms per x with known
conditional probabilities, deterministic y per x, square loss. The exact
objective, the exact optimum over the 2-dimensional space of functions on the
z atoms, and the saddle gap are all closed-form linear algebra.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg as sla

from ..features import TabularStateFeatures
from ..kernels import gaussian, gram
from .base import SampleBatch, Task, TermGroup, encode_dual


class DiscreteToyTask(Task):
    name = "discrete_toy"
    metric_name = "excess_objective"
    primal_dim = 2
    dual_dim = 4

    def __init__(self, kernel_bandwidth: float = 1.0):
        self.x_probs = np.array([0.30, 0.45, 0.25])
        self.y_values = np.array([0.5, -0.3, 0.8])
        # p(z = atom_0 | x_i); atom encodings are the 2-dim one-hots
        self.p_first = np.array([0.2, 0.6, 0.9])
        self.cond_matrix = np.stack([self.p_first, 1.0 - self.p_first], axis=1)
        self.z_encodings = np.eye(2)
        x_enc = np.eye(3)
        self.x_encodings = x_enc
        self.dual_encodings = encode_dual(x_enc, self.y_values)
        self.kernel = gaussian(kernel_bandwidth)
        self.primal_gram = gram(self.kernel, self.z_encodings)
        self.dual_gram = gram(self.kernel, self.dual_encodings)
        self._cum_x = np.cumsum(self.x_probs)
        self._cum_z = np.cumsum(self.cond_matrix, axis=1)
        self._w_star, self._objective_star = self._solve_exact()

    def _solve_exact(self):
        # normal equations of sum_i q_i/2 (p_i . w - y_i)^2 in the 2-dim w
        p = self.cond_matrix
        a = p.T @ (self.x_probs[:, None] * p)
        b = p.T @ (self.x_probs * self.y_values)
        w = sla.solve(a, b)
        return w, self.objective(w)

    def objective(self, w) -> float:
        v = self.cond_matrix @ np.asarray(w)
        return float(self.x_probs @ (0.5 * (v - self.y_values) ** 2))

    def exact_optimum(self):
        """(w*, L*, u*): optimal z-atom values, objective, residual dual."""
        v = self.cond_matrix @ self._w_star
        return self._w_star.copy(), self._objective_star, v - self.y_values

    def exact_models(self):
        """Kernel expansions interpolating the exact primal/dual optima."""
        from ..models import KernelExpansion

        w, _, u = self.exact_optimum()
        primal = KernelExpansion(self.kernel, self.primal_dim)
        alpha = sla.solve(self.primal_gram, w)
        for enc, c in zip(self.z_encodings, alpha):
            primal.add_scaled_section(enc, float(c), primal.evaluate(enc))
        dual = KernelExpansion(self.kernel, self.dual_dim)
        beta = sla.solve(self.dual_gram, u)
        for enc, c in zip(self.dual_encodings, beta):
            dual.add_scaled_section(enc, float(c), dual.evaluate(enc))
        return primal, dual

    def ball_radii(self, margin: float = 4.0):
        """(delta_f, delta) generously containing the exact saddle point."""
        w, _, u = self.exact_optimum()
        f_norm = float(w @ sla.solve(self.primal_gram, w))
        u_norm = float(u @ sla.solve(self.dual_gram, u))
        return margin * f_norm, margin * max(u_norm, 1e-3)

    def sample_batch(self, rng, n: int) -> SampleBatch:
        xi = rng.choice_rows(self._cum_x[None, :], rows=np.zeros(n, dtype=np.intp))
        zi = rng.choice_rows(self._cum_z, rows=xi)
        y = self.y_values[xi]
        x_enc = self.x_encodings[xi]
        z_enc = self.z_encodings[zi]
        return SampleBatch(
            y=y,
            dual_x=self.dual_encodings[xi],
            groups=[TermGroup(z_enc, np.ones(n))],
            offsets=np.zeros(n),
            x_raw=x_enc,
            z_raw=z_enc,
        )

    def sample_conditional(self, x, m: int, rng) -> np.ndarray:
        xi = int(np.argmax(np.asarray(x).reshape(-1)))
        zi = rng.choice_rows(self._cum_z[xi][None, :], rows=np.zeros(m, dtype=np.intp))
        return self.z_encodings[zi]

    def test_metric(self, predict) -> float:
        w = predict(self.z_encodings)
        return self.objective(w) - self._objective_star

    def oracle(self):
        return self.exact_optimum()

    def tabular_primal_features(self):
        return TabularStateFeatures(2)
