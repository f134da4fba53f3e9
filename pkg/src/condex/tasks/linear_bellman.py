"""Optimal control via the multiplicative (desirability) fixed point.

For a chain with costs R and an absorbing boundary, the desirability z
satisfies z(s) = exp(-R(s)) E_{s'|s}[z(s')] on interior states, with boundary
values clamped to exp(-R(b)). Training samples are single passive-dynamics
steps from uniformly drawn interior states; whenever the step lands on the
boundary the known boundary value is substituted exactly (it moves into the
sample's constant offset), which pins the otherwise-trivial z = 0 solution.
The optimal controlled kernel is recovered as p(s'|s) z(s'), normalized.
"""

from __future__ import annotations

import numpy as np

from ..features import TabularStateFeatures
from .base import SampleBatch, Task, TermGroup
from .chains import (
    ChainSpec,
    linear_bellman_oracle,
    one_hot,
    optimal_transition,
    row_cumsums,
)


class LinearBellmanTask(Task):
    name = "linear_bellman"
    metric_name = "max_rel_err"

    def __init__(self, chain: ChainSpec):
        self.chain = chain
        self._z_oracle = linear_bellman_oracle(chain)  # validates boundary + reachability
        n = chain.n
        self.n_states = n
        self.primal_dim = n
        self.dual_dim = n  # y is identically zero, so the dual input is s alone
        self.interior = np.array(chain.interior, dtype=np.intp)
        self.boundary_mask = np.zeros(n, dtype=bool)
        self.boundary_mask[list(chain.boundary)] = True
        self._cum = row_cumsums(chain.transition)
        self._gain = np.exp(-chain.rewards)  # exp(-R(s)) multiplier per state
        self._z_boundary = np.where(self.boundary_mask, self._z_oracle, 0.0)
        self._interior_enc = one_hot(n, self.interior)

    def sample_batch(self, rng, n: int) -> SampleBatch:
        s = self.interior[rng.integers(0, self.interior.shape[0], size=n)]
        sp = rng.choice_rows(self._cum, rows=s)
        hit_boundary = self.boundary_mask[sp]
        g = self._gain[s]
        w2 = np.where(hit_boundary, 0.0, -g)
        offsets = np.where(hit_boundary, -g * self._z_boundary[sp], 0.0)
        s_enc = one_hot(self.n_states, s)
        sp_enc = one_hot(self.n_states, sp)
        return SampleBatch(
            y=np.zeros(n),
            dual_x=s_enc,
            groups=[TermGroup(s_enc, np.ones(n)), TermGroup(sp_enc, w2)],
            offsets=offsets,
            x_raw=s_enc,
            z_raw=sp_enc,
        )

    def sample_conditional(self, x, m: int, rng) -> np.ndarray:
        s = int(np.argmax(np.asarray(x).reshape(-1)))
        u = rng.uniform(0.0, 1.0, m)
        sp = np.minimum((u[:, None] > self._cum[s][None, :]).sum(axis=1), self.n_states - 1)
        return one_hot(self.n_states, sp)

    def test_metric(self, predict) -> float:
        z_hat = predict(self._interior_enc)
        z_true = self._z_oracle[self.interior]
        return float(np.max(np.abs(z_hat - z_true) / np.abs(z_true)))

    def oracle(self):
        return self._z_oracle

    def optimal_transition(self) -> np.ndarray:
        return optimal_transition(self.chain, self._z_oracle)

    def tabular_primal_features(self):
        return TabularStateFeatures(self.n_states)

    def tabular_dual_features(self):
        return TabularStateFeatures(self.n_states)


def linear_bellman_task(chain: ChainSpec) -> LinearBellmanTask:
    return LinearBellmanTask(chain)
