"""Finite Markov chains with exact linear-algebra oracles.

Hitting/return times, stationary distributions, discounted values and the
multiplicative (desirability) fixed point are all small dense solves here;
the sampling tasks check themselves against these.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import linalg as sla

from ..exceptions import NumericalError
from ..rng import SeededRng

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ChainSpec:
    """Finite chain: row-stochastic transition, per-state rewards, boundary set."""

    transition: np.ndarray
    rewards: np.ndarray
    boundary: Tuple[int, ...] = ()

    def __post_init__(self):
        p = np.asarray(self.transition, dtype=np.float64)
        r = np.asarray(self.rewards, dtype=np.float64).reshape(-1)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"transition must be square, got {p.shape}")
        if r.shape[0] != p.shape[0]:
            raise ValueError("rewards length must match state count")
        if np.any(p < 0):
            raise ValueError("transition entries must be >= 0")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > _ROW_SUM_TOL:
            raise ValueError(f"transition rows must sum to 1 within {_ROW_SUM_TOL:g}")
        bset = tuple(sorted(set(int(b) for b in self.boundary)))
        if bset and (bset[0] < 0 or bset[-1] >= p.shape[0]):
            raise ValueError("boundary indices out of range")
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "boundary", bset)

    @property
    def n(self) -> int:
        return self.transition.shape[0]

    @property
    def interior(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.boundary)


def save_chain(spec: ChainSpec, path):
    lines = ["chain 1", f"n {spec.n}"]
    for row in spec.transition:
        lines.append("P " + " ".join(repr(float(v)) for v in row))
    lines.append("R " + " ".join(repr(float(v)) for v in spec.rewards))
    lines.append("boundary " + " ".join(str(b) for b in spec.boundary))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_chain(path) -> ChainSpec:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "chain 1":
        raise ValueError("not a chain record")
    n = int(lines[1].split()[1])
    rows = []
    rewards = None
    boundary = ()
    for ln in lines[2:]:
        tag, *vals = ln.split()
        if tag == "P":
            rows.append([float(v) for v in vals])
        elif tag == "R":
            rewards = [float(v) for v in vals]
        elif tag == "boundary":
            boundary = tuple(int(v) for v in vals)
        else:
            raise ValueError(f"unknown chain record line {tag!r}")
    p = np.asarray(rows)
    if p.shape != (n, n):
        raise ValueError(f"expected {n} transition rows of length {n}")
    return ChainSpec(p, np.asarray(rewards), boundary)  # row sums re-validated


def is_irreducible(p) -> bool:
    """Every state reaches every state: (I + A)^(n-1) has no zero entries."""
    a = (np.asarray(p) > 0).astype(np.int64)
    n = a.shape[0]
    reach = np.minimum(np.eye(n, dtype=np.int64) + a, 1)
    power = np.eye(n, dtype=np.int64)
    for _ in range(n - 1):
        power = np.minimum(power @ reach, 1)
    return bool(power.all())


def is_primitive(p, max_power: int = 64) -> bool:
    """Some power P^k (k <= max_power) is entrywise positive."""
    a = (np.asarray(p) > 0).astype(np.int64)
    b = a.copy()
    for _ in range(max_power):
        if b.all():
            return True
        b = np.minimum(b @ a, 1)
    return bool(b.all())


def stationary_distribution(p) -> np.ndarray:
    """Left Perron vector of a row-stochastic matrix, normalized to sum 1."""
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[0]
    a = p.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = sla.solve(a, b)
    return pi


def hitting_time_oracle(chain: ChainSpec):
    """Expected hitting times h[s, t] and the stationary distribution.

    Off-diagonal block for target t: h(s,t) = 1 + sum_{k != t} P[s,k] h(k,t);
    diagonal (return time): one full step from t, then off-diagonal values.
    Cross-checked internally: 1/h(i,i) must match the left eigenvector of P
    to 1e-10.
    """
    p = chain.transition
    n = chain.n
    if not is_irreducible(p):
        raise ValueError("hitting-time oracle requires an irreducible chain")
    h = np.zeros((n, n))
    for t in range(n):
        others = [s for s in range(n) if s != t]
        sub = p[np.ix_(others, others)]
        h_off = sla.solve(np.eye(n - 1) - sub, np.ones(n - 1))
        h[others, t] = h_off
        h[t, t] = 1.0 + p[t, others] @ h_off
    pi = 1.0 / np.diag(h)
    pi_eigen = stationary_distribution(p)
    if np.max(np.abs(pi - pi_eigen)) > 1e-10:
        raise NumericalError(
            "stationary cross-check failed: 1/h(i,i) disagrees with the left eigenvector"
        )
    return h, pi


def tabular_value(chain: ChainSpec, gamma_disc: float) -> np.ndarray:
    """Discounted value V = (I - gamma P)^(-1) R."""
    if not 0.0 < gamma_disc < 1.0:
        raise ValueError(f"discount must be in (0,1), got {gamma_disc}")
    n = chain.n
    return sla.solve(np.eye(n) - gamma_disc * chain.transition, chain.rewards)


def _boundary_reachable(chain: ChainSpec) -> bool:
    # reverse BFS from the boundary over the support graph
    support = chain.transition > 0
    reached = set(chain.boundary)
    frontier = list(chain.boundary)
    while frontier:
        nxt = []
        for b in frontier:
            for s in np.nonzero(support[:, b])[0]:
                if s not in reached:
                    reached.add(int(s))
                    nxt.append(int(s))
        frontier = nxt
    return all(s in reached for s in chain.interior)


def linear_bellman_oracle(chain: ChainSpec):
    """Desirability fixed point z(s) = exp(-R(s)) E_{s'|s}[z(s')].

    Boundary states are clamped to exp(-R(b)); the interior block solves
    (I - G_I P_II) z_I = G_I P_IB z_B. Returns the full z vector (boundary
    values included) after verifying the fixed-point residual to 1e-10.
    """
    if not chain.boundary:
        raise ValueError("linear Bellman oracle needs a nonempty boundary")
    if not _boundary_reachable(chain):
        raise ValueError("some interior state cannot reach the boundary")
    interior = list(chain.interior)
    boundary = list(chain.boundary)
    p = chain.transition
    g_int = np.exp(-chain.rewards[interior])
    z_b = np.exp(-chain.rewards[boundary])
    p_ii = p[np.ix_(interior, interior)]
    p_ib = p[np.ix_(interior, boundary)]
    a = np.eye(len(interior)) - g_int[:, None] * p_ii
    rhs = g_int * (p_ib @ z_b)
    z_i = sla.solve(a, rhs)
    z = np.zeros(chain.n)
    z[interior] = z_i
    z[boundary] = z_b
    residual = np.max(np.abs(z_i - g_int * (p[interior] @ z)))
    if residual > 1e-10:
        raise NumericalError(f"linear Bellman residual {residual:.3e} exceeds 1e-10")
    return z


def optimal_transition(chain: ChainSpec, z: np.ndarray) -> np.ndarray:
    """Controlled kernel p*(s'|s) proportional to p(s'|s) z(s'), normalized
    over s' (explicit normalization; the raw product does not sum to 1)."""
    raw = chain.transition * np.asarray(z)[None, :]
    totals = raw.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise ValueError("optimal transition undefined: a row has zero mass")
    return raw / totals


def random_irreducible_chain(n: int, rng: SeededRng, min_entry: float = 0.02,
                             rewards=None) -> ChainSpec:
    """Strictly positive random row-stochastic chain (hence primitive)."""
    raw = min_entry + rng.uniform(0.0, 1.0, (n, n))
    p = raw / raw.sum(axis=1, keepdims=True)
    r = np.zeros(n) if rewards is None else np.asarray(rewards, dtype=np.float64)
    return ChainSpec(p, r)


def random_boundary_chain(n: int, rng: SeededRng, n_boundary: int = 1,
                          reward_scale: float = 1.0) -> ChainSpec:
    """Random chain with absorbing boundary states and nonnegative interior
    costs; boundary costs are zero so the clamped desirability there is 1."""
    if not 0 < n_boundary < n:
        raise ValueError("need at least one interior and one boundary state")
    raw = 0.02 + rng.uniform(0.0, 1.0, (n, n))
    p = raw / raw.sum(axis=1, keepdims=True)
    boundary = tuple(range(n - n_boundary, n))
    for b in boundary:
        p[b] = 0.0
        p[b, b] = 1.0
    rewards = reward_scale * rng.uniform(0.0, 1.0, n)
    rewards[list(boundary)] = 0.0
    return ChainSpec(p, rewards, boundary)


def one_hot(n: int, idx) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.intp)
    out = np.zeros((idx.shape[0], n)) if idx.ndim else np.zeros(n)
    if idx.ndim:
        out[np.arange(idx.shape[0]), idx] = 1.0
    else:
        out[idx] = 1.0
    return out


def row_cumsums(p) -> np.ndarray:
    c = np.cumsum(np.asarray(p, dtype=np.float64), axis=-1)
    return c
