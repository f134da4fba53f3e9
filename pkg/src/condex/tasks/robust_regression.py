"""Regression with contaminated inputs (noisy-measurement benchmark).

The latent input is clean, the observed input carries Gaussian contamination,
and conditional draws around the observation encode the perturbation prior:

    xbar ~ U[-0.5, 0.5],  x = xbar + 0.05 e,  e ~ N(0, 1)
    y = (sin(3.53 pi xbar) + cos(7.7 pi xbar)) exp(-1.6 pi |xbar|)
        + 3 xbar^2 + 0.01 e
    z | x ~ N(x, 0.05^2)

The same draw of e contaminates both the input and the response. Testing is
noiseless: the metric evaluates f directly on a clean grid against the clean
curve.
"""

from __future__ import annotations

import numpy as np

from .base import SampleBatch, Task, TermGroup, encode_dual


def clean_curve(xbar):
    xbar = np.asarray(xbar, dtype=np.float64)
    return (
        (np.sin(3.53 * np.pi * xbar) + np.cos(7.7 * np.pi * xbar))
        * np.exp(-1.6 * np.pi * np.abs(xbar))
        + 3.0 * xbar**2
    )


class RobustRegressionTask(Task):
    name = "robust_regression"
    metric_name = "test_mse"
    primal_dim = 1
    dual_dim = 2

    def __init__(
        self,
        x_noise: float = 0.05,
        y_noise: float = 0.01,
        cond_scale: float = 0.05,
        second_moment: str = "std",
        n_grid: int = 1000,
    ):
        if second_moment not in ("variance", "std"):
            raise ValueError(f"second_moment must be 'variance' or 'std', got {second_moment!r}")
        self.x_noise = float(x_noise)
        self.y_noise = float(y_noise)
        # printed as N(x, 0.05^2): the second argument is the variance 0.05^2,
        # i.e. standard deviation 0.05
        self.cond_std = cond_scale if second_moment == "std" else np.sqrt(cond_scale)
        self.grid = np.linspace(-0.5, 0.5, n_grid)
        self.clean_grid = clean_curve(self.grid)
        self.zero_model_metric = float(np.mean(self.clean_grid**2))

    def sample_batch(self, rng, n: int) -> SampleBatch:
        xbar = rng.uniform(-0.5, 0.5, n)
        e = rng.standard_normal(n)
        x = xbar + self.x_noise * e
        y = clean_curve(xbar) + self.y_noise * e
        z = x + self.cond_std * rng.standard_normal(n)
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
        return (x0 + self.cond_std * rng.standard_normal(m))[:, None]

    def test_metric(self, predict) -> float:
        f_hat = predict(self.grid[:, None])
        return float(np.mean((f_hat - self.clean_grid) ** 2))
