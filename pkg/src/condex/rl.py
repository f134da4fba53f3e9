"""Policy evaluation: environments, the Bellman-residual task adapter, the
mean-square Bellman error estimator, and the finite-basis baselines.

The adapter maps a transition ((s, a), R(s, a), s') onto the conditional-
sample interface: the primal function is the value V with the Bellman
difference feature psi(s) - gamma * psi(s'), the target is the reward, and
the dual lives on s (or (s || a) when the policy is stochastic). Off-policy
data multiplies both update directions by the importance ratio.

GTD2 with a shared finite basis is algebraically a special case of the
saddle solver; its update rules (and the residual-gradient surrogate) are
implemented both as single-step functions and as batched estimators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import DivergenceError
from .features import RandomFourierFeatures, TabularStateFeatures
from .kernels import gaussian, median_bandwidth
from .models import LinearFeatureModel
from .rng import SeededRng
from .schedules import StepSchedule
from .solvers import DIVERGENCE_LIMIT, SolverReport, metric_iterations
from .tasks.base import SampleBatch, Task, TermGroup
from .tasks.chains import ChainSpec, one_hot, row_cumsums, tabular_value


class NavigationMDP:
    """Point navigation in an unbounded room.

    Reward exp(-100 ||s||^2) peaks at the origin; the evaluated deterministic
    policy follows the reward gradient, a = -0.2 s R(s); transitions are
    Gaussian around s + a. States are their own encoding (2-dimensional).
    """

    state_dim = 2
    action_dim = 2

    def __init__(self, state_var: float = 0.2, transition_var: float = 0.1,
                 gamma_disc: float = 0.9):
        self.state_var = float(state_var)
        self.transition_var = float(transition_var)
        self.gamma_disc = float(gamma_disc)

    def reward_of_state(self, s) -> np.ndarray:
        s = np.atleast_2d(s)
        return np.exp(-100.0 * np.sum(s * s, axis=1))

    def sample_states(self, rng: SeededRng, n: int) -> np.ndarray:
        return np.sqrt(self.state_var) * rng.standard_normal((n, 2))

    def policy_actions(self, rng: SeededRng, states) -> np.ndarray:
        return -0.2 * states * self.reward_of_state(states)[:, None]

    def behavior_actions(self, rng: SeededRng, states):
        return self.policy_actions(rng, states), None

    def transition(self, rng: SeededRng, states, actions) -> np.ndarray:
        mean = states + actions
        return mean + np.sqrt(self.transition_var) * rng.standard_normal(mean.shape)

    def reward(self, states, actions) -> np.ndarray:
        return self.reward_of_state(states)

    def encode_states(self, states) -> np.ndarray:
        return np.atleast_2d(states)

    def encode_state_actions(self, states, actions) -> np.ndarray:
        return np.concatenate([np.atleast_2d(states), np.atleast_2d(actions)], axis=1)


def navigation_spec(state_var: float = 0.2, transition_var: float = 0.1,
                    gamma_disc: float = 0.9) -> NavigationMDP:
    return NavigationMDP(state_var, transition_var, gamma_disc)


class ChainPolicyMDP:
    """Finite MDP over a chain: discrete actions with target/behavior policy
    tables. States and actions are one-hot encoded for the function spaces."""

    def __init__(self, transitions, rewards, policy, behavior_policy=None,
                 gamma_disc: float = 0.9, initial=None):
        self.transitions = np.asarray(transitions, dtype=np.float64)  # (A, n, n)
        if self.transitions.ndim == 2:
            self.transitions = self.transitions[None, :, :]
        self.n_actions, self.n_states, _ = self.transitions.shape
        self.rewards = np.asarray(rewards, dtype=np.float64)  # (n,) or (n, A)
        if self.rewards.ndim == 1:
            self.rewards = np.repeat(self.rewards[:, None], self.n_actions, axis=1)
        self.policy = np.asarray(policy, dtype=np.float64)  # (n, A)
        self.behavior = (np.asarray(behavior_policy, dtype=np.float64)
                         if behavior_policy is not None else None)
        self.gamma_disc = float(gamma_disc)
        self.initial = (np.asarray(initial, dtype=np.float64)
                        if initial is not None else np.full(self.n_states, 1.0 / self.n_states))
        self.state_dim = self.n_states
        self.action_dim = self.n_actions
        self._cum_initial = np.cumsum(self.initial)
        self._cum_policy = np.cumsum(self.policy, axis=1)
        self._cum_behavior = (np.cumsum(self.behavior, axis=1)
                              if self.behavior is not None else None)
        self._cum_trans = np.cumsum(self.transitions, axis=2)  # (A, n, n)

    @classmethod
    def from_chain(cls, chain: ChainSpec, gamma_disc: float = 0.9):
        """Action-free wrapper: one dummy action following the chain kernel."""
        n = chain.n
        return cls(chain.transition[None, :, :], chain.rewards,
                   np.ones((n, 1)), gamma_disc=gamma_disc)

    def marginal_policy_transition(self) -> np.ndarray:
        """P_pi(s'|s) = sum_a pi(a|s) P_a(s'|s)."""
        return np.einsum("na,ans->ns", self.policy, self.transitions)

    def sample_states(self, rng: SeededRng, n: int) -> np.ndarray:
        return rng.choice_rows(self._cum_initial[None, :], rows=np.zeros(n, dtype=np.intp))

    def policy_actions(self, rng: SeededRng, states) -> np.ndarray:
        return rng.choice_rows(self._cum_policy, rows=np.asarray(states, dtype=np.intp))

    def behavior_actions(self, rng: SeededRng, states):
        states = np.asarray(states, dtype=np.intp)
        if self.behavior is None:
            return self.policy_actions(rng, states), None
        actions = rng.choice_rows(self._cum_behavior, rows=states)
        rho = self.policy[states, actions] / self.behavior[states, actions]
        return actions, rho

    def transition(self, rng: SeededRng, states, actions) -> np.ndarray:
        states = np.asarray(states, dtype=np.intp)
        actions = np.asarray(actions, dtype=np.intp)
        out = np.empty(states.shape[0], dtype=np.intp)
        for a in range(self.n_actions):
            mask = actions == a
            if np.any(mask):
                out[mask] = rng.choice_rows(self._cum_trans[a], rows=states[mask])
        return out

    def reward(self, states, actions) -> np.ndarray:
        return self.rewards[np.asarray(states, dtype=np.intp),
                            np.asarray(actions, dtype=np.intp)]

    def encode_states(self, states) -> np.ndarray:
        return one_hot(self.n_states, np.asarray(states, dtype=np.intp))

    def encode_state_actions(self, states, actions) -> np.ndarray:
        return np.concatenate(
            [one_hot(self.n_states, np.asarray(states, dtype=np.intp)),
             one_hot(self.n_actions, np.asarray(actions, dtype=np.intp))], axis=1)

    def exact_value(self) -> np.ndarray:
        p_pi = self.marginal_policy_transition()
        r_pi = np.sum(self.policy * self.rewards, axis=1)
        return tabular_value(ChainSpec(p_pi, r_pi), self.gamma_disc)

    def exact_msbe(self, v_values, n_successors: Optional[int] = None) -> float:
        """Enumerated MSBE of a tabular V under (initial, policy).

        With ``n_successors`` given, returns the finite-sample expectation of
        the estimator that averages that many fresh successor draws (it
        carries a positive gamma^2 Var[V(s')]/n bias on the squared term).
        """
        v = np.asarray(v_values, dtype=np.float64)
        msbe = 0.0
        for s in range(self.n_states):
            for a in range(self.n_actions):
                w = self.initial[s] * self.policy[s, a]
                if w == 0.0:
                    continue
                p_row = self.transitions[a, s]
                resid = self.rewards[s, a] - (v[s] - self.gamma_disc * (p_row @ v))
                term = resid**2
                if n_successors is not None:
                    var = p_row @ (v - p_row @ v) ** 2
                    term += (self.gamma_disc**2) * var / n_successors
                msbe += w * term
        return float(msbe)


class PolicyEvaluationTask(Task):
    """Bellman-error minimization as a conditional-sample task.

    x is the (state, action) pair, y the reward, z the successor; the primal
    section structure is the difference feature [s: +1, s': -gamma]. The dual
    input is s for deterministic policies ("s") or the (s || a) encoding
    ("sa"). With ``off_policy=True`` the behavior policy drives sampling and
    both update directions carry the importance ratio.
    """

    name = "policy_evaluation"
    metric_name = "msbe"

    def __init__(self, mdp, dual_inputs: str = "s", off_policy: bool = False,
                 eval_seed: int = 1234, n_eval_states: int = 100,
                 n_eval_successors: int = 100):
        if dual_inputs not in ("s", "sa"):
            raise ValueError(f"dual_inputs must be 's' or 'sa', got {dual_inputs!r}")
        self.mdp = mdp
        self.dual_inputs = dual_inputs
        self.off_policy = off_policy
        self.gamma_disc = mdp.gamma_disc
        probe_enc = mdp.encode_states(mdp.sample_states(SeededRng(0), 1))
        self.primal_dim = probe_enc.shape[1]
        if dual_inputs == "s":
            self.dual_dim = self.primal_dim
        else:
            s0 = mdp.sample_states(SeededRng(0), 1)
            a0 = mdp.policy_actions(SeededRng(0), s0)
            self.dual_dim = mdp.encode_state_actions(s0, a0).shape[1]
        self.eval_seed = eval_seed
        self.n_eval_states = n_eval_states
        self.n_eval_successors = n_eval_successors

    def sample_batch(self, rng, n: int) -> SampleBatch:
        mdp = self.mdp
        s = mdp.sample_states(rng, n)
        if self.off_policy:
            a, rho = mdp.behavior_actions(rng, s)
        else:
            a, rho = mdp.policy_actions(rng, s), None
        sp = mdp.transition(rng, s, a)
        y = mdp.reward(s, a)
        s_enc = mdp.encode_states(s)
        sp_enc = mdp.encode_states(sp)
        dual_x = s_enc if self.dual_inputs == "s" else mdp.encode_state_actions(s, a)
        return SampleBatch(
            y=y,
            dual_x=dual_x,
            groups=[TermGroup(s_enc, np.ones(n)),
                    TermGroup(sp_enc, -self.gamma_disc * np.ones(n))],
            offsets=np.zeros(n),
            x_raw=dual_x,
            z_raw=sp_enc,
            rho=rho,
        )

    def sample_conditional(self, x, m: int, rng) -> np.ndarray:
        raise NotImplementedError(
            "policy evaluation observes one successor per (s, a); use the MDP directly"
        )

    def test_metric(self, predict) -> float:
        return msbe(predict, self.mdp, self.n_eval_states, self.n_eval_successors,
                    SeededRng(self.eval_seed))

    def tabular_primal_features(self):
        if not isinstance(self.mdp, ChainPolicyMDP):
            raise ValueError("tabular features need a finite MDP")
        return TabularStateFeatures(self.mdp.n_states)

    def tabular_dual_features(self):
        if not isinstance(self.mdp, ChainPolicyMDP) or self.dual_inputs != "s":
            raise ValueError("tabular dual features need a finite MDP with dual over s")
        return TabularStateFeatures(self.mdp.n_states)


def pe_triplet_adapter(mdp, rng: SeededRng, dual_inputs: str = "s"):
    """One transition as a (x, y, z) triplet (diagnostic view of the adapter)."""
    task = PolicyEvaluationTask(mdp, dual_inputs=dual_inputs)
    return task.sample(rng)


def msbe(predict, mdp, n_states: int, n_successors: int, rng: SeededRng) -> float:
    """Monte-Carlo MSBE: fresh policy actions and ``n_successors`` successor
    draws per test state."""
    if n_successors < 1:
        raise ValueError(f"n_successors must be >= 1, got {n_successors}")
    s = mdp.sample_states(rng, n_states)
    a = mdp.policy_actions(rng, s)
    r = mdp.reward(s, a)
    v_s = predict(mdp.encode_states(s))
    s_rep = np.repeat(s, n_successors, axis=0)
    a_rep = np.repeat(a, n_successors, axis=0)
    sp = mdp.transition(rng, s_rep, a_rep)
    v_sp = predict(mdp.encode_states(sp)).reshape(n_states, n_successors)
    estimate = v_s - mdp.gamma_disc * v_sp.mean(axis=1)
    return float(np.mean((r - estimate) ** 2))


# ---------------------------------------------------------------------------
# finite-basis baselines
# ---------------------------------------------------------------------------


def gtd2_step(theta, eta, psi_s, psi_sp, reward, gamma_disc, gamma_step):
    """One GTD2 update; both new iterates use the index-i (pre-update) pair."""
    theta = np.asarray(theta, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    if theta.shape != eta.shape or theta.shape != np.shape(psi_s):
        raise ValueError("theta, eta and the feature vectors must share one dimension")
    delta = reward + gamma_disc * (theta @ psi_sp) - theta @ psi_s
    u_s = eta @ psi_s
    eta_next = eta + gamma_step * (delta - u_s) * psi_s
    theta_next = theta - gamma_step * u_s * (gamma_disc * psi_sp - psi_s)
    return theta_next, eta_next


def residual_gradient_step(theta, psi_s, psi_sp, reward, gamma_disc, gamma_step):
    """SGD on the squared temporal difference (the double-sample-free
    surrogate): theta moves along +delta * (psi(s) - gamma psi(s'))."""
    theta = np.asarray(theta, dtype=np.float64)
    delta = reward + gamma_disc * (theta @ psi_sp) - theta @ psi_s
    return theta + gamma_step * delta * (psi_s - gamma_disc * psi_sp)


@dataclass
class _FittedLinearValue:
    feature_map: object
    weights: np.ndarray

    def evaluate_batch(self, x) -> np.ndarray:
        return self.feature_map.transform(x) @ self.weights


class _LinearTDBase(BaseEstimator):
    """Shared plumbing for the finite-basis TD baselines."""

    def _make_features(self, task, rng):
        if self.feature_space == "tabular":
            return task.tabular_primal_features()
        bw = self.bandwidth
        if bw is None:
            probe = task.sample_batch(rng.substream(1), 256)
            bw = median_bandwidth(probe.groups[0].points, self.bandwidth_coeff)
        return RandomFourierFeatures(gaussian(bw), self.n_features,
                                     task.primal_dim, rng.substream(2).stream_id)

    def _loop(self, task, seed, update):
        rng = SeededRng(seed)
        fm = self._make_features(task, rng)
        schedule = StepSchedule(self.schedule_form, self.step_scale, self.step_n0)
        sampling = rng.substream(0)
        hooks = set(metric_iterations(self.t_max))
        trace = []
        theta = np.zeros(fm.n_features)
        eta = np.zeros(fm.n_features)
        avg = np.zeros(fm.n_features)
        gamma_sum = 0.0
        for t in range(1, self.t_max + 1):
            gamma_step = schedule.step(t)
            batch = task.sample_batch(sampling, self.batch_size)
            psi_s = fm.transform(batch.groups[0].points)
            psi_sp = fm.transform(batch.groups[1].points)
            rho = batch.rho if batch.rho is not None else np.ones(batch.size)
            theta, eta = update(theta, eta, psi_s, psi_sp, batch.y, rho, gamma_step)
            if not np.all(np.isfinite(theta)) or np.max(np.abs(theta)) > DIVERGENCE_LIMIT:
                raise DivergenceError("parameter magnitude exceeded limit", t)
            avg += gamma_step * theta
            gamma_sum += gamma_step
            if t in hooks and self.record_metrics:
                model = _FittedLinearValue(fm, avg / gamma_sum)
                trace.append((t * self.batch_size, task.metric_name,
                              float(task.test_metric(model.evaluate_batch))))
        self.feature_map_ = fm
        self.theta_ = theta
        self.eta_ = eta
        self.value_ = _FittedLinearValue(fm, avg / gamma_sum)
        self.report_ = SolverReport(self.solver_name, task.metric_name,
                                    self.value_, None, trace)
        return self


class GTD2(_LinearTDBase):
    """Gradient TD policy evaluation on a fixed finite basis."""

    solver_name = "gtd2"

    def __init__(self, schedule_form: str = "eta_over_n0_plus_sqrt_t",
                 step_scale: float = 1.0, step_n0: float = 1.0,
                 feature_space: str = "rff", n_features: int = 256,
                 bandwidth: Optional[float] = None, bandwidth_coeff: float = 1.0,
                 batch_size: int = 1, t_max: int = 1000, record_metrics: bool = True):
        self.schedule_form = schedule_form
        self.step_scale = step_scale
        self.step_n0 = step_n0
        self.feature_space = feature_space
        self.n_features = n_features
        self.bandwidth = bandwidth
        self.bandwidth_coeff = bandwidth_coeff
        self.batch_size = batch_size
        self.t_max = t_max
        self.record_metrics = record_metrics

    def fit(self, task: PolicyEvaluationTask, seed: int = 0):
        gamma_disc = task.gamma_disc

        def update(theta, eta, psi_s, psi_sp, y, rho, gamma_step):
            n = psi_s.shape[0]
            delta = y + gamma_disc * (psi_sp @ theta) - psi_s @ theta
            u_s = psi_s @ eta
            eta_dir = (psi_s * (rho * (delta - u_s))[:, None]).mean(axis=0)
            theta_dir = ((gamma_disc * psi_sp - psi_s) * (rho * u_s)[:, None]).mean(axis=0)
            return theta - gamma_step * theta_dir, eta + gamma_step * eta_dir

        return self._loop(task, seed, update)


class ResidualGradient(_LinearTDBase):
    """SGD on the squared temporal difference over a fixed finite basis."""

    solver_name = "residual_gradient"

    def __init__(self, schedule_form: str = "eta_over_n0_plus_t",
                 step_scale: float = 1.0, step_n0: float = 1.0,
                 feature_space: str = "rff", n_features: int = 256,
                 bandwidth: Optional[float] = None, bandwidth_coeff: float = 1.0,
                 batch_size: int = 1, t_max: int = 1000, record_metrics: bool = True):
        self.schedule_form = schedule_form
        self.step_scale = step_scale
        self.step_n0 = step_n0
        self.feature_space = feature_space
        self.n_features = n_features
        self.bandwidth = bandwidth
        self.bandwidth_coeff = bandwidth_coeff
        self.batch_size = batch_size
        self.t_max = t_max
        self.record_metrics = record_metrics

    def fit(self, task: PolicyEvaluationTask, seed: int = 0):
        gamma_disc = task.gamma_disc

        def update(theta, eta, psi_s, psi_sp, y, rho, gamma_step):
            delta = y + gamma_disc * (psi_sp @ theta) - psi_s @ theta
            direction = ((psi_s - gamma_disc * psi_sp) * (rho * delta)[:, None]).mean(axis=0)
            return theta + gamma_step * direction, eta

        return self._loop(task, seed, update)
