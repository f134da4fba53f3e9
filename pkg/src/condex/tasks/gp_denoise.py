"""Signal recovery from conditionally smoothed observations.

A fixed smooth ground truth f* is observed only through its Gaussian
smoothing: y(x) = E[f*(z)] with z ~ N(x, 0.3). The task is to recover f*
given (x, y) pairs and one conditional draw of z per pair. The default f* is
a seeded random trigonometric expansion with decaying amplitudes, which has a
closed-form smoothing; the quadrature route cross-checks it in tests and
serves arbitrary ground-truth overrides.
"""

from __future__ import annotations

import numpy as np

from ..rng import SeededRng
from .base import SampleBatch, Task, TermGroup, encode_dual
from .quadrature import GaussianQuadrature


class TrigExpansion:
    """f(z) = sum_k a_k sin(w_k z + p_k); Gaussian smoothing in closed form."""

    def __init__(self, amplitudes, frequencies, phases):
        self.amplitudes = np.asarray(amplitudes, dtype=np.float64)
        self.frequencies = np.asarray(frequencies, dtype=np.float64)
        self.phases = np.asarray(phases, dtype=np.float64)

    @classmethod
    def random(cls, seed: int, n_terms: int = 10, amplitude: float = 1.5):
        rng = SeededRng(seed, stream_id=77)
        k = np.arange(1, n_terms + 1)
        amps = amplitude * rng.standard_normal(n_terms) / k
        freqs = 0.7 * k
        phases = rng.uniform(0.0, 2.0 * np.pi, n_terms)
        return cls(amps, freqs, phases)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.float64)
        return np.sin(np.multiply.outer(z, self.frequencies) + self.phases) @ self.amplitudes

    def smoothed(self, x, variance: float):
        """E_{z ~ N(x, variance)}[f(z)]: each mode damps by exp(-w^2 var/2)."""
        x = np.asarray(x, dtype=np.float64)
        damp = np.exp(-0.5 * self.frequencies**2 * variance)
        return np.sin(np.multiply.outer(x, self.frequencies) + self.phases) @ (
            damp * self.amplitudes
        )


class GpDenoiseTask(Task):
    """x ~ U[-1, 1]; z ~ N(x, 0.3); y = E[f*(z)|x]; recover f*.

    ``second_moment`` controls whether 0.3 is read as a variance (default) or
    a standard deviation. Metric: MSE of E[f(z)|x] against y over a 200-point
    grid, the inner expectation taken by the shared quadrature rule.
    """

    name = "gp_denoise"
    metric_name = "test_mse"
    primal_dim = 1
    dual_dim = 2

    def __init__(
        self,
        seed: int = 0,
        ground_truth=None,
        cond_scale: float = 0.3,
        second_moment: str = "variance",
        n_grid: int = 200,
        oracle_nodes: int = 10001,
        metric_nodes: int = 401,
    ):
        if second_moment not in ("variance", "std"):
            raise ValueError(f"second_moment must be 'variance' or 'std', got {second_moment!r}")
        self.seed = int(seed)
        self.cond_var = cond_scale if second_moment == "variance" else cond_scale**2
        self.ground_truth = ground_truth or TrigExpansion.random(seed)
        self.oracle_quadrature = GaussianQuadrature(oracle_nodes)
        self.metric_quadrature = GaussianQuadrature(metric_nodes)
        self.grid = np.linspace(-1.0, 1.0, n_grid)
        self.y_grid = self.smoothed_truth(self.grid)

    def smoothed_truth(self, x) -> np.ndarray:
        """y(x) = E[f*(z)|x]; closed form when f* provides one, else quadrature."""
        if hasattr(self.ground_truth, "smoothed"):
            return self.ground_truth.smoothed(x, self.cond_var)
        return self.oracle_quadrature.expectation(self.ground_truth, x, self.cond_var)

    def quadrature_truth(self, x) -> np.ndarray:
        """Always-quadrature route (the cross-check oracle for the closed form)."""
        return self.oracle_quadrature.expectation(self.ground_truth, x, self.cond_var)

    def sample_batch(self, rng, n: int) -> SampleBatch:
        x = rng.uniform(-1.0, 1.0, n)
        y = self.smoothed_truth(x)
        z = x + np.sqrt(self.cond_var) * rng.standard_normal(n)
        x_col = x[:, None]
        z_col = z[:, None]
        return SampleBatch(
            y=y,
            dual_x=encode_dual(x_col, y),
            groups=[TermGroup(z_col, np.ones(n))],
            offsets=np.zeros(n),
            x_raw=x_col,
            z_raw=z_col,
        )

    def sample_conditional(self, x, m: int, rng) -> np.ndarray:
        x0 = float(np.asarray(x).reshape(-1)[0])
        return (x0 + np.sqrt(self.cond_var) * rng.standard_normal(m))[:, None]

    def smoothed_prediction(self, predict, x) -> np.ndarray:
        return self.metric_quadrature.expectation_of_predictor(predict, x, self.cond_var)

    def test_metric(self, predict) -> float:
        y_hat = self.smoothed_prediction(predict, self.grid)
        return float(np.mean((y_hat - self.y_grid) ** 2))

    def dual_grid_encodings(self) -> np.ndarray:
        """(x, y(x)) encodings of the test grid, for dual-function inspection."""
        return encode_dual(self.grid[:, None], self.y_grid)

    def oracle(self):
        return self.ground_truth
