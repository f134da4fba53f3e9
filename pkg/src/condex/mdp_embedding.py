"""Two-stage policy evaluation through conditional embeddings of the dynamics.

Stage 1 fits a nonparametric regression from (s, a) to the expected feature
of the successor: given m transitions, query weights are
alpha(s, a) = (K + lam*m*I)^{-1} k((S, A), (s, a)), so that
E[g(s') | s, a] ~= alpha(s, a) . g(S'). Stage 2 runs functional (kernel) or
parametric (random-feature) SGD on the Bellman error, replacing the inner
conditional expectation by the embedding.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import DivergenceError
from .features import RandomFourierFeatures
from .kernels import Kernel, cross_gram, gaussian, gram, median_bandwidth
from .linalg import RegularizedFactor
from .rng import SeededRng
from .schedules import StepSchedule
from .solvers import DIVERGENCE_LIMIT, SolverReport, metric_iterations


class DynamicsKernelEmbedding:
    """Kernel conditional embedding of p(s'|s, a) from sampled transitions."""

    def __init__(self, kernel_sa: Kernel, kernel_s: Kernel, lam: float):
        self.kernel_sa = kernel_sa
        self.kernel_s = kernel_s
        self.lam = float(lam)

    def fit(self, sa_points, successors):
        self.sa_points_ = np.atleast_2d(np.asarray(sa_points, dtype=np.float64))
        self.successors_ = np.atleast_2d(np.asarray(successors, dtype=np.float64))
        if self.sa_points_.shape[0] < 1:
            raise ValueError("need at least one transition")
        if self.sa_points_.shape[0] != self.successors_.shape[0]:
            raise ValueError("sa_points and successors must align")
        k = gram(self.kernel_sa, self.sa_points_)
        self._factor = RegularizedFactor(k, self.lam)
        self.n_data_ = self.sa_points_.shape[0]
        return self

    def weights(self, sa_query) -> np.ndarray:
        """alpha weights over training successors, shape (n_query, m)."""
        sa_query = np.atleast_2d(np.asarray(sa_query, dtype=np.float64))
        k_vec = cross_gram(self.kernel_sa, self.sa_points_, sa_query)
        return self._factor.solve(k_vec).T

    def expected_value(self, sa_query, g_at_successors) -> np.ndarray:
        """E[g(s')|s,a] estimates: alpha(s,a) . g(S')."""
        return self.weights(sa_query) @ np.asarray(g_at_successors, dtype=np.float64)


def embed_dynamics_kernel(data, kernel_sa: Kernel, kernel_s: Kernel, lam: float):
    """Fit the embedding from a list of (s, a, s') encodings (or two arrays)."""
    if isinstance(data, tuple) and len(data) == 2:
        sa, sp = data
    else:
        sa = np.stack([np.concatenate([np.ravel(s), np.ravel(a)]) for s, a, _ in data])
        sp = np.stack([np.ravel(spp) for _, _, spp in data])
    return DynamicsKernelEmbedding(kernel_sa, kernel_s, lam).fit(sa, sp)


class _KernelModeValue:
    """V as sections over the fixed successor dictionary plus sampled states.

    The embedding part of every update lands on the fixed successor block, so
    its coefficients merge in place; each iteration adds only the sampled
    state as a new section. V at the successor dictionary is maintained
    incrementally (the per-step quantity the update needs).
    """

    def __init__(self, kernel_s: Kernel, successors: np.ndarray):
        self.kernel = kernel_s
        self.successors = successors
        m = successors.shape[0]
        self._block_gram = gram(kernel_s, successors)
        self.block_coeffs = np.zeros(m)
        self.extra_points = []
        self.extra_coeffs = []
        self.v_at_successors = np.zeros(m)

    def scale(self, factor: float):
        self.block_coeffs *= factor
        if self.extra_coeffs:
            self.extra_coeffs = [c * factor for c in self.extra_coeffs]
        self.v_at_successors *= factor

    def add_block(self, delta_coeffs: np.ndarray):
        self.block_coeffs += delta_coeffs
        self.v_at_successors += self._block_gram @ delta_coeffs

    def add_points(self, points: np.ndarray, coeffs: np.ndarray):
        for p, c in zip(points, coeffs):
            self.extra_points.append(p)
            self.extra_coeffs.append(float(c))
        self.v_at_successors += cross_gram(self.kernel, self.successors, points) @ coeffs

    def evaluate_batch(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = cross_gram(self.kernel, x, self.successors) @ self.block_coeffs
        if self.extra_points:
            pts = np.asarray(self.extra_points)
            out += cross_gram(self.kernel, x, pts) @ np.asarray(self.extra_coeffs)
        return out


class KernelMDPPolicyEval(BaseEstimator):
    """Policy evaluation with an embedded transition model (two-stage).

    ``mode="kernel"``: functional SGD, the value is a kernel expansion and
    the embedding supplies both E[V(s')|s,a] and the expected successor
    section. ``mode="random_feature"``: parametric SGD with the embedding
    compressed to a feature-space operator. Step sizes follow eta/(n0 + t).
    """

    solver_name = "kernel_mdp"

    def __init__(self, mode: str = "kernel", n_embed: int = 200, lam_embed: float = 1e-2,
                 schedule_form: str = "eta_over_n0_plus_t", step_scale: float = 1.0,
                 step_n0: float = 1.0, lam1: float = 0.0, batch_size: int = 1,
                 t_max: int = 1000, bandwidth_sa: Optional[float] = None,
                 bandwidth_s: Optional[float] = None, bandwidth_coeff: float = 1.0,
                 n_features: int = 256, record_metrics: bool = True):
        if mode not in ("kernel", "random_feature"):
            raise ValueError(f"mode must be 'kernel' or 'random_feature', got {mode!r}")
        self.mode = mode
        self.n_embed = n_embed
        self.lam_embed = lam_embed
        self.schedule_form = schedule_form
        self.step_scale = step_scale
        self.step_n0 = step_n0
        self.lam1 = lam1
        self.batch_size = batch_size
        self.t_max = t_max
        self.bandwidth_sa = bandwidth_sa
        self.bandwidth_s = bandwidth_s
        self.bandwidth_coeff = bandwidth_coeff
        self.n_features = n_features
        self.record_metrics = record_metrics

    def _collect(self, task, rng, n):
        mdp = task.mdp
        s = mdp.sample_states(rng, n)
        if task.off_policy:
            a, rho = mdp.behavior_actions(rng, s)
        else:
            a, rho = mdp.policy_actions(rng, s), None
        sp = mdp.transition(rng, s, a)
        return (mdp.encode_state_actions(s, a), mdp.encode_states(s),
                mdp.encode_states(sp), mdp.reward(s, a),
                rho if rho is not None else np.ones(n))

    def fit(self, task, seed: int = 0):
        rng = SeededRng(seed)
        mdp = task.mdp
        gamma_disc = mdp.gamma_disc

        sa_emb, _, sp_emb, _, _ = self._collect(task, rng.substream(10), self.n_embed)
        bw_sa = self.bandwidth_sa or median_bandwidth(sa_emb, self.bandwidth_coeff)
        bw_s = self.bandwidth_s or median_bandwidth(sp_emb, self.bandwidth_coeff)
        kernel_sa, kernel_s = gaussian(bw_sa), gaussian(bw_s)

        schedule = StepSchedule(self.schedule_form, self.step_scale, self.step_n0)
        sampling = rng.substream(0)
        hooks = set(metric_iterations(self.t_max))
        trace = []

        if self.mode == "kernel":
            embedding = DynamicsKernelEmbedding(kernel_sa, kernel_s, self.lam_embed)
            embedding.fit(sa_emb, sp_emb)
            value = _KernelModeValue(kernel_s, embedding.successors_)
            for t in range(1, self.t_max + 1):
                gamma_step = schedule.step(t)
                sa, s_enc, _, r, rho = self._collect(task, sampling, self.batch_size)
                alpha = embedding.weights(sa)  # (B, m)
                v_bar = alpha @ value.v_at_successors
                v_s = value.evaluate_batch(s_enc)
                if not np.all(np.isfinite(v_s)) or np.max(np.abs(v_s), initial=0.0) > DIVERGENCE_LIMIT:
                    raise DivergenceError("value iterate exceeded limit", t)
                delta = rho * (v_s - (r + gamma_disc * v_bar))
                value.scale(1.0 - gamma_step * self.lam1)
                scale = gamma_step / self.batch_size
                value.add_points(s_enc, -scale * delta)
                value.add_block(gamma_disc * scale * (alpha.T @ delta))
                if t in hooks and self.record_metrics:
                    trace.append((t * self.batch_size, task.metric_name,
                                  float(task.test_metric(value.evaluate_batch))))
            self.value_ = value
        else:
            fm_sa = RandomFourierFeatures(kernel_sa, self.n_features, sa_emb.shape[1],
                                          rng.substream(11).stream_id)
            fm_s = RandomFourierFeatures(kernel_s, self.n_features, sp_emb.shape[1],
                                         rng.substream(12).stream_id)
            phi = fm_sa.transform(sa_emb).T  # (p, m)
            psi = fm_s.transform(sp_emb).T  # (p, m)
            m = sa_emb.shape[0]
            reg = phi @ phi.T + self.lam_embed * m * np.eye(phi.shape[0])
            tau = np.linalg.solve(reg, phi @ psi.T)  # (p, p): phi-space -> psi-space
            theta = np.zeros(fm_s.n_features)
            avg = np.zeros_like(theta)
            gamma_sum = 0.0
            for t in range(1, self.t_max + 1):
                gamma_step = schedule.step(t)
                sa, s_enc, _, r, rho = self._collect(task, sampling, self.batch_size)
                psi_s = fm_s.transform(s_enc)
                tau_sa = fm_sa.transform(sa) @ tau  # (B, p): expected successor feature
                v_s = psi_s @ theta
                v_bar = tau_sa @ theta
                if not np.all(np.isfinite(v_s)) or np.max(np.abs(v_s), initial=0.0) > DIVERGENCE_LIMIT:
                    raise DivergenceError("value iterate exceeded limit", t)
                delta = rho * (v_s - (r + gamma_disc * v_bar))
                direction = ((psi_s - gamma_disc * tau_sa) * delta[:, None]).mean(axis=0)
                theta = (1.0 - gamma_step * self.lam1) * theta - gamma_step * direction
                avg += gamma_step * theta
                gamma_sum += gamma_step
                if t in hooks and self.record_metrics:
                    w = avg / gamma_sum
                    trace.append((t * self.batch_size, task.metric_name,
                                  float(task.test_metric(
                                      lambda x: fm_s.transform(x) @ w))))
            self.feature_map_ = fm_s
            self.theta_ = theta
            weights = avg / gamma_sum

            class _Predictor:
                def __init__(self, fm, w):
                    self.fm, self.w = fm, w

                def evaluate_batch(self, x):
                    return self.fm.transform(x) @ self.w

            self.value_ = _Predictor(fm_s, weights)

        self.report_ = SolverReport(self.solver_name, task.metric_name,
                                    self.value_, None, trace)
        return self


def kernel_mdp_sgd_run(task, mode: str, schedule: StepSchedule, t_max: int,
                       seed: int = 0, **kwargs) -> SolverReport:
    solver = KernelMDPPolicyEval(
        mode=mode, schedule_form=schedule.form, step_scale=schedule.scale,
        step_n0=schedule.n0 if schedule.n0 else 1.0, t_max=t_max, **kwargs)
    return solver.fit(task, seed=seed).report_
