"""Expected hitting times of a finite chain, learned from one-step transitions.

The learned function h(s, t) is the expected number of steps for the chain to
first reach t from s (diagonal: the return time, whose reciprocal is the
stationary probability). A training sample for the pair (s, t) is one chain
step s -> s'; the recursion h(s,t) = 1 + E[h(s',t); s' != t] is expressed by
clamping the successor section to zero whenever the step hits the target, so
the classical hitting time is the exact population optimum for every pair
(``successor_rule="clamp"``, the default).

``successor_rule="renormalized"`` instead draws s' from the restricted,
renormalized kernel (the literal modified-kernel construction). Note that its
population objective is not minimized by the classical hitting time whenever
p(t|s) > 0, so it is kept for inspection, not for the oracle-equivalence
checks.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import DegenerateDataError
from ..features import TabularPairFeatures
from .base import SampleBatch, Task, TermGroup
from .chains import ChainSpec, hitting_time_oracle, is_primitive, one_hot, row_cumsums

CLAMP = "clamp"
RENORMALIZED = "renormalized"


class HittingTimeTask(Task):
    name = "hitting_time"
    metric_name = "max_rel_err"

    def __init__(self, chain: ChainSpec, successor_rule: str = CLAMP):
        if successor_rule not in (CLAMP, RENORMALIZED):
            raise ValueError(f"unknown successor rule {successor_rule!r}")
        if not is_primitive(chain.transition):
            raise ValueError(
                "hitting-time task needs a chain with an all-positive power P^n, n <= 64"
            )
        self.chain = chain
        self.successor_rule = successor_rule
        n = chain.n
        self.n_states = n
        self.primal_dim = 2 * n
        self.dual_dim = 2 * n  # y is constant, so the dual input is (s, t) alone
        self._cum = row_cumsums(chain.transition)
        if successor_rule == RENORMALIZED:
            self._restricted_cum = self._build_restricted()
        self._h_oracle, self._pi_oracle = hitting_time_oracle(chain)
        self._all_pairs = self._pair_encodings()

    def _build_restricted(self):
        n = self.chain.n
        p = self.chain.transition
        tables = np.zeros((n, n, n))
        for t in range(n):
            rows = p.copy()
            rows[:, t] = 0.0
            mass = rows.sum(axis=1)
            bad = (mass <= 0.0) & (np.arange(n) != t)
            if np.any(bad):
                raise DegenerateDataError(
                    f"restricted kernel has zero mass for pairs (s={np.nonzero(bad)[0]}, t={t})"
                )
            mass[t] = 1.0  # diagonal pairs use the full kernel; placeholder row
            tables[t] = np.cumsum(rows / mass[:, None], axis=1)
            tables[t, t] = self._cum[t]
        return tables

    def _pair_encodings(self) -> np.ndarray:
        n = self.n_states
        s, t = np.divmod(np.arange(n * n), n)
        return np.concatenate([one_hot(n, s), one_hot(n, t)], axis=1)

    def encode_pairs(self, s, t) -> np.ndarray:
        n = self.n_states
        return np.concatenate([one_hot(n, np.asarray(s)), one_hot(n, np.asarray(t))], axis=1)

    def sample_batch(self, rng, n: int) -> SampleBatch:
        ns = self.n_states
        pair = rng.integers(0, ns * ns, size=n)
        s, t = np.divmod(pair, ns)
        if self.successor_rule == CLAMP:
            sp = rng.choice_rows(self._cum, rows=s)
            w2 = np.where(sp == t, 0.0, -1.0)
        else:
            tables = self._restricted_cum[t, s]  # (n, ns) per-pair cumulative rows
            u = rng.uniform(0.0, 1.0, n)
            sp = np.minimum((u[:, None] > tables).sum(axis=1), ns - 1)
            w2 = -np.ones(n)
        x_enc = self.encode_pairs(s, t)
        z_enc = self.encode_pairs(sp, t)
        y = np.ones(n)
        return SampleBatch(
            y=y,
            dual_x=x_enc,
            groups=[TermGroup(x_enc, np.ones(n)), TermGroup(z_enc, w2)],
            offsets=np.zeros(n),
            x_raw=x_enc,
            z_raw=z_enc,
        )

    def sample_conditional(self, x, m: int, rng) -> np.ndarray:
        n = self.n_states
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        s = int(np.argmax(x[:n]))
        t = int(np.argmax(x[n:]))
        if self.successor_rule == CLAMP or s == t:
            cum = self._cum[s]
        else:
            cum = self._restricted_cum[t, s]
        u = rng.uniform(0.0, 1.0, m)
        sp = np.minimum((u[:, None] > cum[None, :]).sum(axis=1), n - 1)
        return self.encode_pairs(sp, np.full(m, t))

    def test_metric(self, predict) -> float:
        h_hat = predict(self._all_pairs).reshape(self.n_states, self.n_states)
        return float(np.max(np.abs(h_hat - self._h_oracle) / self._h_oracle))

    def oracle(self):
        return self._h_oracle, self._pi_oracle

    def tabular_primal_features(self):
        return TabularPairFeatures(self.n_states)

    def tabular_dual_features(self):
        return TabularPairFeatures(self.n_states)


def hitting_time_task(chain: ChainSpec, successor_rule: str = CLAMP) -> HittingTimeTask:
    return HittingTimeTask(chain, successor_rule)
