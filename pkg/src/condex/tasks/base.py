"""Task interface: conditional-distribution benchmarks with exact oracles.

A task is a joint sampler over triplets (x, y, z) — (x, y) from the joint law
and z from the conditional p(z|x) — plus everything a solver needs to consume
it: the per-sample structure of the primal function (which kernel sections a
gradient step touches, with what weights and constant offset), the dual input
encoding, a deterministic test metric, and an exact oracle when one exists.

For the plain regression-style tasks the primal structure is a single section
at z with weight one. The recursive tasks (policy evaluation, hitting time,
linear Bellman) carry difference features and clamped/offset successor terms;
they express those through the same ``TermGroup`` mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class TripletSample:
    """One draw: (x, y) from the joint law, z from p(z|x)."""

    x: np.ndarray
    y: float
    z: np.ndarray


@dataclass
class TermGroup:
    """One kernel-section group of a batch: points (n, d) with weights (n,)."""

    points: np.ndarray
    weights: np.ndarray


@dataclass
class SampleBatch:
    """A vectorized batch of triplets with their solver-facing structure.

    The primal sample value for row b is
    ``sum_g groups[g].weights[b] * f(groups[g].points[b]) + offsets[b]``;
    ``rho`` carries importance weights (1 unless off-policy).
    """

    y: np.ndarray
    dual_x: np.ndarray
    groups: List[TermGroup]
    offsets: np.ndarray
    x_raw: np.ndarray
    z_raw: np.ndarray
    rho: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.y.shape[0]

    def primal_values(self, model) -> np.ndarray:
        """Evaluate the model through the batch structure (pre-update)."""
        vals = self.offsets.copy()
        for g in self.groups:
            vals += g.weights * model.evaluate_batch(g.points)
        return vals


def encode_dual(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Default dual input: the concatenated (x || y) vector."""
    return np.concatenate([x, y[:, None]], axis=1)


class Task:
    """Base class; subclasses fill in sampling, metric and dims."""

    name = "task"
    metric_name = "metric"
    primal_dim: int
    dual_dim: int

    def sample_batch(self, rng, n: int) -> SampleBatch:
        raise NotImplementedError

    def sample(self, rng) -> TripletSample:
        batch = self.sample_batch(rng, 1)
        return TripletSample(batch.x_raw[0], float(batch.y[0]), batch.z_raw[0])

    def sample_conditional(self, x, m: int, rng) -> np.ndarray:
        raise NotImplementedError

    def test_metric(self, predict) -> float:
        """Deterministic quality of a primal predictor (a batch callable)."""
        raise NotImplementedError

    def oracle(self):
        return None

    # Finite tasks override these with exact indicator maps.
    def tabular_primal_features(self):
        raise ValueError(f"task {self.name!r} has no tabular primal feature map")

    def tabular_dual_features(self):
        raise ValueError(f"task {self.name!r} has no tabular dual feature map")
