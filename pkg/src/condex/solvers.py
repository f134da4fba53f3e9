"""Stochastic primal-dual solvers.

The central object is the saddle-point step: with one conditional sample per
iteration, evaluate the primal through the sample's structure (a := f at the
sample) and the dual at the (x, y) encoding (b := u(x, y)), then

    f <- Pi_F( f - gamma * b * psi(sample) )
    u <- Pi_H( u + gamma * (a - conjugate_grad(y, b)) * phi(x, y) )

with both evaluations taken before either update, and step-size-weighted
iterate averages maintained online. The regularized variant replaces the
projections by pre-step shrinkage (1 - gamma*lam).

Baselines built on the same plumbing: plain SGD with virtual samples (the
conditional expectation moved outside the loss), sample-average approximation
over a materialized N x M dataset, and the doubly stochastic variant that
draws one random feature per iteration and replays it from its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import DivergenceError
from .features import RandomFourierFeatures
from .kernels import Kernel, gaussian, median_bandwidth
from .losses import SquareLoss, square_loss
from .models import AdaptiveFeatureModel, KernelExpansion, LinearFeatureModel
from .rng import SeededRng
from .schedules import StepSchedule, eta_over_n0_plus_sqrt_t
from .tasks.base import SampleBatch, Task, TermGroup, encode_dual

DIVERGENCE_LIMIT = 1e8

# Substream layout inside a solver run; fixed so reruns are bit-identical.
_STREAM_SAMPLING = 0
_STREAM_PROBE = 1
_STREAM_PRIMAL_FEATURES = 2
_STREAM_DUAL_FEATURES = 3
_STREAM_METRIC = 4


@dataclass
class Projected:
    """Ball constraints: ||f||^2 <= delta_f (None = unconstrained), ||u||^2 <= delta."""

    delta_f: Optional[float]
    delta: float


@dataclass
class Regularized:
    """Norm penalties (lam1/2)||f||^2 and (lam2/2)||u||^2 via shrinkage."""

    lam1: float
    lam2: float


@dataclass
class SaddleState:
    primal: object
    dual: object
    t: int = 0
    gamma_sum: float = 0.0


@dataclass
class SolverReport:
    """Averaged iterates plus the metric trace recorded during the run."""

    solver: str
    metric_name: str
    primal: object
    dual: Optional[object]
    trace: List[Tuple[int, str, float]] = field(default_factory=list)

    @property
    def final_value(self) -> float:
        return self.trace[-1][2]


def _check_finite(values, t):
    if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > DIVERGENCE_LIMIT:
        raise DivergenceError(f"iterate magnitude exceeded {DIVERGENCE_LIMIT:g}", t)


def apply_saddle_step(state: SaddleState, batch: SampleBatch, gamma: float, mode, loss):
    """One primal-dual step on a batch (per-sample directions averaged)."""
    n = batch.size
    group_vals = [state.primal.evaluate_batch(g.points) for g in batch.groups]
    a = batch.offsets.copy()
    for g, vals in zip(batch.groups, group_vals):
        a += g.weights * vals
    b = state.dual.evaluate_batch(batch.dual_x)
    t_next = state.t + 1
    _check_finite(a, t_next)
    _check_finite(b, t_next)
    rho = batch.rho if batch.rho is not None else 1.0

    primal_scale = 1.0
    dual_scale = 1.0
    if isinstance(mode, Regularized):
        primal_scale = 1.0 - gamma * mode.lam1
        dual_scale = 1.0 - gamma * mode.lam2
        state.primal.shrink(primal_scale)
        state.dual.shrink(dual_scale)

    # Primal step: one fused section-add across all groups so the norm cache
    # sees the full within-step Gram coupling. Values are post-shrink.
    coeff = -(gamma / n) * rho * b
    points = np.concatenate([g.points for g in batch.groups], axis=0)
    section_coeffs = np.concatenate([coeff * g.weights for g in batch.groups])
    section_vals = np.concatenate([primal_scale * v for v in group_vals])
    state.primal.add_sections(points, section_coeffs, section_vals)

    dual_coeffs = (gamma / n) * rho * (a - loss.conjugate_grad(batch.y, b))
    state.dual.add_sections(batch.dual_x, dual_coeffs, dual_scale * b)

    if isinstance(mode, Projected):
        if mode.delta_f is not None:
            state.primal.project_ball(mode.delta_f)
        state.dual.project_ball(mode.delta)

    state.primal.accumulate_average(gamma)
    state.dual.accumulate_average(gamma)
    state.t = t_next
    state.gamma_sum += gamma
    return state


def embedding_sgd_step(state: SaddleState, sample, gamma: float, mode, loss):
    """Single-sample step with the generic structure: one section at z, dual
    input (x || y)."""
    x = np.asarray(sample.x, dtype=np.float64).reshape(1, -1)
    z = np.asarray(sample.z, dtype=np.float64).reshape(1, -1)
    y = np.array([sample.y], dtype=np.float64)
    batch = SampleBatch(
        y=y,
        dual_x=encode_dual(x, y),
        groups=[TermGroup(z, np.ones(1))],
        offsets=np.zeros(1),
        x_raw=x,
        z_raw=z,
    )
    return apply_saddle_step(state, batch, gamma, mode, loss)


def metric_iterations(t_max: int):
    """Geometric hook grid {1, 2, 4, ...} plus the final iteration."""
    its = []
    t = 1
    while t < t_max:
        its.append(t)
        t *= 2
    its.append(t_max)
    return its


def run_saddle(
    task: Task,
    state: SaddleState,
    loss,
    schedule: StepSchedule,
    mode,
    t_max: int,
    rng: SeededRng,
    batch_size: int = 1,
    solver_name: str = "embedding_sgd",
    metric_fn=None,
    record_metrics: bool = True,
) -> SolverReport:
    """Drive ``apply_saddle_step`` for ``t_max`` iterations, recording the
    task metric of the averaged primal at geometrically spaced checkpoints."""
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    sampling = rng.substream(_STREAM_SAMPLING)
    hooks = set(metric_iterations(t_max)) if record_metrics else {t_max}
    trace = []
    for t in range(1, t_max + 1):
        gamma = schedule.step(t)
        batch = task.sample_batch(sampling, batch_size)
        try:
            apply_saddle_step(state, batch, gamma, mode, loss)
        except DivergenceError as err:
            err.partial_trace = trace
            raise
        if record_metrics and t in hooks:
            avg = state.primal.averaged_copy(state.gamma_sum)
            value = metric_fn(avg) if metric_fn else task.test_metric(avg.evaluate_batch)
            trace.append((t * batch_size, task.metric_name, float(value)))
    primal_avg = state.primal.averaged_copy(state.gamma_sum)
    dual_avg = state.dual.averaged_copy(state.gamma_sum)
    return SolverReport(solver_name, task.metric_name, primal_avg, dual_avg, trace)


# ---------------------------------------------------------------------------
# function-space construction shared by the estimators
# ---------------------------------------------------------------------------

KERNEL_SPACE = "kernel"
RFF_SPACE = "rff"
TABULAR_SPACE = "tabular"
ADAPTIVE_SPACE = "adaptive"


def _probe_points(task: Task, rng: SeededRng, n: int, side: str) -> np.ndarray:
    batch = task.sample_batch(rng, n)
    if side == "dual":
        return batch.dual_x
    return np.concatenate([g.points for g in batch.groups], axis=0)


def resolve_bandwidth(task, side, bandwidth, coeff, rng, probe_size=256):
    """Explicit bandwidth, or the median heuristic on a probe sample."""
    if bandwidth is not None:
        return float(bandwidth)
    return median_bandwidth(_probe_points(task, rng, probe_size, side), coeff)


def make_function_space(task, side, space, kernel: Optional[Kernel], n_features, seed):
    dim = task.primal_dim if side == "primal" else task.dual_dim
    if space == KERNEL_SPACE:
        return KernelExpansion(kernel, dim)
    if space == RFF_SPACE:
        return LinearFeatureModel(RandomFourierFeatures(kernel, n_features, dim, seed))
    if space == ADAPTIVE_SPACE:
        return AdaptiveFeatureModel.from_kernel(kernel, n_features, dim, seed)
    if space == TABULAR_SPACE:
        fm = (
            task.tabular_primal_features()
            if side == "primal"
            else task.tabular_dual_features()
        )
        return LinearFeatureModel(fm)
    raise ValueError(f"unknown function space {space!r}")


class _SaddleEstimator(BaseEstimator):
    """Shared construction/fit plumbing for the saddle-style estimators."""

    def _schedule(self) -> StepSchedule:
        return StepSchedule(self.schedule_form, self.step_scale, self.step_n0)

    def _mode(self):
        if self.mode == "projected":
            return Projected(self.delta_f, self.delta)
        if self.mode == "regularized":
            return Regularized(self.lam1, self.lam2)
        raise ValueError(f"unknown mode {self.mode!r}")

    def _build_spaces(self, task, rng):
        probe = rng.substream(_STREAM_PROBE)
        primal_kernel = dual_kernel = None
        if self.primal_space in (KERNEL_SPACE, RFF_SPACE, ADAPTIVE_SPACE):
            primal_kernel = gaussian(
                resolve_bandwidth(task, "primal", self.primal_bandwidth,
                                  self.primal_bandwidth_coeff, probe)
            )
        if self.dual_space in (KERNEL_SPACE, RFF_SPACE, ADAPTIVE_SPACE):
            dual_kernel = gaussian(
                resolve_bandwidth(task, "dual", self.dual_bandwidth,
                                  self.dual_bandwidth_coeff, probe)
            )
        primal = make_function_space(
            task, "primal", self.primal_space, primal_kernel,
            self.n_primal_features, rng.substream(_STREAM_PRIMAL_FEATURES).stream_id,
        )
        dual = make_function_space(
            task, "dual", self.dual_space, dual_kernel,
            self.n_dual_features, rng.substream(_STREAM_DUAL_FEATURES).stream_id,
        )
        return primal, dual


class EmbeddingSGD(_SaddleEstimator):
    """Primal-dual SGD on the dual-embedding saddle reformulation.

    One conditional sample per iteration; projected or norm-regularized mode;
    outputs step-size-weighted averaged iterates.
    """

    solver_name = "embedding_sgd"

    def __init__(
        self,
        schedule_form: str = "eta_over_n0_plus_sqrt_t",
        step_scale: float = 1.0,
        step_n0: float = 1.0,
        mode: str = "regularized",
        delta_f: Optional[float] = None,
        delta: float = 1.0,
        lam1: float = 1e-4,
        lam2: float = 1e-4,
        batch_size: int = 1,
        t_max: int = 1000,
        primal_space: str = RFF_SPACE,
        dual_space: str = RFF_SPACE,
        primal_bandwidth: Optional[float] = None,
        primal_bandwidth_coeff: float = 1.0,
        dual_bandwidth: Optional[float] = None,
        dual_bandwidth_coeff: float = 1.0,
        n_primal_features: int = 256,
        n_dual_features: int = 256,
        record_metrics: bool = True,
    ):
        self.schedule_form = schedule_form
        self.step_scale = step_scale
        self.step_n0 = step_n0
        self.mode = mode
        self.delta_f = delta_f
        self.delta = delta
        self.lam1 = lam1
        self.lam2 = lam2
        self.batch_size = batch_size
        self.t_max = t_max
        self.primal_space = primal_space
        self.dual_space = dual_space
        self.primal_bandwidth = primal_bandwidth
        self.primal_bandwidth_coeff = primal_bandwidth_coeff
        self.dual_bandwidth = dual_bandwidth
        self.dual_bandwidth_coeff = dual_bandwidth_coeff
        self.n_primal_features = n_primal_features
        self.n_dual_features = n_dual_features
        self.record_metrics = record_metrics

    def fit(self, task: Task, seed: int = 0, loss=None):
        rng = SeededRng(seed)
        primal, dual = self._build_spaces(task, rng)
        state = SaddleState(primal, dual)
        self.report_ = run_saddle(
            task,
            state,
            loss or square_loss(),
            self._schedule(),
            self._mode(),
            self.t_max,
            rng,
            batch_size=self.batch_size,
            solver_name=self.solver_name,
            record_metrics=self.record_metrics,
        )
        self.state_ = state
        self.primal_ = self.report_.primal
        self.dual_ = self.report_.dual
        return self


class VirtualSampleSGD(_SaddleEstimator):
    """Plain SGD on the virtual-sample upper bound E[loss(y, f(z))].

    The conditional expectation is moved outside the loss, so each z acts as
    an ordinary labelled example; no dual variable exists.
    """

    solver_name = "virtual_sgd"

    def __init__(
        self,
        schedule_form: str = "eta_over_n0_plus_sqrt_t",
        step_scale: float = 1.0,
        step_n0: float = 1.0,
        lam1: float = 1e-4,
        batch_size: int = 1,
        t_max: int = 1000,
        primal_space: str = RFF_SPACE,
        primal_bandwidth: Optional[float] = None,
        primal_bandwidth_coeff: float = 1.0,
        n_primal_features: int = 256,
        record_metrics: bool = True,
    ):
        self.schedule_form = schedule_form
        self.step_scale = step_scale
        self.step_n0 = step_n0
        self.lam1 = lam1
        self.batch_size = batch_size
        self.t_max = t_max
        self.primal_space = primal_space
        self.primal_bandwidth = primal_bandwidth
        self.primal_bandwidth_coeff = primal_bandwidth_coeff
        self.n_primal_features = n_primal_features
        self.record_metrics = record_metrics

    def fit(self, task: Task, seed: int = 0):
        rng = SeededRng(seed)
        probe = rng.substream(_STREAM_PROBE)
        kernel = None
        if self.primal_space in (KERNEL_SPACE, RFF_SPACE, ADAPTIVE_SPACE):
            kernel = gaussian(
                resolve_bandwidth(task, "primal", self.primal_bandwidth,
                                  self.primal_bandwidth_coeff, probe)
            )
        model = make_function_space(
            task, "primal", self.primal_space, kernel,
            self.n_primal_features, rng.substream(_STREAM_PRIMAL_FEATURES).stream_id,
        )
        schedule = self._schedule()
        sampling = rng.substream(_STREAM_SAMPLING)
        hooks = set(metric_iterations(self.t_max))
        trace = []
        gamma_sum = 0.0
        for t in range(1, self.t_max + 1):
            gamma = schedule.step(t)
            batch = task.sample_batch(sampling, self.batch_size)
            group_vals = [model.evaluate_batch(g.points) for g in batch.groups]
            v = batch.offsets.copy()
            for g, vals in zip(batch.groups, group_vals):
                v += g.weights * vals
            _check_finite(v, t)
            rho = batch.rho if batch.rho is not None else 1.0
            scale = 1.0 - gamma * self.lam1
            model.shrink(scale)
            coeff = -(gamma / batch.size) * rho * (v - batch.y)
            points = np.concatenate([g.points for g in batch.groups], axis=0)
            coeffs = np.concatenate([coeff * g.weights for g in batch.groups])
            section_vals = np.concatenate([scale * gv for gv in group_vals])
            model.add_sections(points, coeffs, section_vals)
            model.accumulate_average(gamma)
            gamma_sum += gamma
            if t in hooks and self.record_metrics:
                avg = model.averaged_copy(gamma_sum)
                trace.append(
                    (t * self.batch_size, task.metric_name,
                     float(task.test_metric(avg.evaluate_batch)))
                )
        self.primal_ = model.averaged_copy(gamma_sum)
        self.report_ = SolverReport(
            self.solver_name, task.metric_name, self.primal_, None, trace
        )
        return self


class SAASolver(BaseEstimator):
    """Sample-average approximation: materialize N outer draws with M
    conditional draws each, then run deterministic full-batch gradient
    descent on the empirical objective over a linear feature model.

    Only tasks whose primal structure is a single unit-weight section at z
    are supported (the regression-style benchmarks).
    """

    solver_name = "sgd_saa"

    def __init__(
        self,
        n_outer: int = 1000,
        m_inner: int = 10,
        lam1: float = 0.0,
        primal_space: str = RFF_SPACE,
        primal_bandwidth: Optional[float] = None,
        primal_bandwidth_coeff: float = 1.0,
        n_primal_features: int = 256,
        gd_tol: float = 1e-9,
        gd_max_steps: int = 20000,
    ):
        self.n_outer = n_outer
        self.m_inner = m_inner
        self.lam1 = lam1
        self.primal_space = primal_space
        self.primal_bandwidth = primal_bandwidth
        self.primal_bandwidth_coeff = primal_bandwidth_coeff
        self.n_primal_features = n_primal_features
        self.gd_tol = gd_tol
        self.gd_max_steps = gd_max_steps

    def fit(self, task: Task, seed: int = 0):
        if self.m_inner < 1:
            raise ValueError(f"m_inner must be >= 1, got {self.m_inner}")
        rng = SeededRng(seed)
        batch = task.sample_batch(rng.substream(_STREAM_SAMPLING), self.n_outer)
        if len(batch.groups) != 1 or np.any(batch.offsets != 0.0):
            raise ValueError("SAA supports single-section tasks only")
        if self.primal_space == TABULAR_SPACE:
            fm = task.tabular_primal_features()
        elif self.primal_space == RFF_SPACE:
            bw = resolve_bandwidth(
                task, "primal", self.primal_bandwidth,
                self.primal_bandwidth_coeff, rng.substream(_STREAM_PROBE),
            )
            fm = RandomFourierFeatures(
                gaussian(bw), self.n_primal_features, task.primal_dim,
                rng.substream(_STREAM_PRIMAL_FEATURES).stream_id,
            )
        else:
            raise ValueError("SAA runs on linear feature spaces (rff or tabular)")

        cond = rng.substream(_STREAM_SAMPLING).substream(1)
        phi_bar = np.empty((self.n_outer, fm.n_features))
        for i in range(self.n_outer):
            zs = task.sample_conditional(batch.x_raw[i], self.m_inner, cond.substream(i))
            phi_bar[i] = fm.transform(zs).mean(axis=0)
        y = batch.y

        # Full-batch GD with 1/L steps on the SAA least-squares objective.
        n = self.n_outer
        gram = phi_bar.T @ phi_bar / n
        lip = float(np.linalg.eigvalsh(gram)[-1]) + self.lam1
        step = 1.0 / lip
        theta = np.zeros(fm.n_features)
        target = phi_bar.T @ y / n
        for it in range(self.gd_max_steps):
            grad = gram @ theta - target + self.lam1 * theta
            gnorm = float(np.linalg.norm(grad))
            if gnorm <= self.gd_tol:
                break
            theta -= step * grad
        model = LinearFeatureModel(fm)
        model.weights = theta
        self.primal_ = model
        self.gd_steps_ = it + 1
        self.grad_norm_ = gnorm
        self.objective_ = float(0.5 * np.mean((y - phi_bar @ theta) ** 2))
        self.report_ = SolverReport(
            self.solver_name, task.metric_name, model, None,
            [(self.n_outer * self.m_inner, task.metric_name,
              float(task.test_metric(model.evaluate_batch)))],
        )
        return self


class DoublyModel:
    """Growing random-feature expansion with seed-replayable frequencies.

    Iteration i contributes one cosine feature whose (frequency, phase) pair
    is a pure function of (base stream, i); prediction replays the features
    from their seeds, so the model state proper is just the coefficient list.
    """

    def __init__(self, kernel: Kernel, input_dim: int, base_rng: SeededRng):
        self.kernel = kernel
        self.input_dim = int(input_dim)
        self.base_rng = base_rng
        self.coeffs: List[float] = []
        self._omegas = np.empty((0, self.input_dim))
        self._phases = np.empty(0)

    def feature_for(self, index: int):
        """Re-materialize feature ``index`` (1-based iteration) from its seed."""
        sub = self.base_rng.substream(index)
        omega = sub.standard_normal(self.input_dim) / self.kernel.bandwidth
        phase = float(sub.uniform(0.0, 2.0 * np.pi))
        return omega, phase

    def append(self, index: int, coeff: float):
        omega, phase = self.feature_for(index)
        self._omegas = np.vstack([self._omegas, omega[None, :]])
        self._phases = np.append(self._phases, phase)
        self.coeffs.append(float(coeff))

    def decay(self, factor: float):
        if self.coeffs:
            arr = np.asarray(self.coeffs)
            self.coeffs = list(arr * factor)

    def evaluate_batch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if not self.coeffs:
            return np.zeros(x.shape[0])
        feats = np.sqrt(2.0) * np.cos(x @ self._omegas.T + self._phases)
        return feats @ np.asarray(self.coeffs)

    def evaluate(self, x) -> float:
        return float(self.evaluate_batch(np.asarray(x).reshape(1, -1))[0])

    def predict_from_seeds(self, x) -> np.ndarray:
        """Evaluation that rebuilds every feature from its seed (the replay
        contract); equals ``evaluate_batch`` exactly."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        out = np.zeros(x.shape[0])
        for i, coeff in enumerate(self.coeffs, start=1):
            omega, phase = self.feature_for(i)
            out += coeff * np.sqrt(2.0) * np.cos(x @ omega + phase)
        return out


class DoublySGD(BaseEstimator):
    """Doubly stochastic saddle solver: one data sample and one fresh random
    feature per function per iteration, with norm shrinkage; prediction
    replays features from seeds."""

    solver_name = "doubly_sgd"

    def __init__(
        self,
        schedule_form: str = "eta_over_n0_plus_sqrt_t",
        step_scale: float = 1.0,
        step_n0: float = 1.0,
        lam1: float = 1e-4,
        lam2: float = 1e-4,
        batch_size: int = 1,
        t_max: int = 1000,
        primal_bandwidth: Optional[float] = None,
        primal_bandwidth_coeff: float = 1.0,
        dual_bandwidth: Optional[float] = None,
        dual_bandwidth_coeff: float = 1.0,
        record_metrics: bool = True,
    ):
        self.schedule_form = schedule_form
        self.step_scale = step_scale
        self.step_n0 = step_n0
        self.lam1 = lam1
        self.lam2 = lam2
        self.batch_size = batch_size
        self.t_max = t_max
        self.primal_bandwidth = primal_bandwidth
        self.primal_bandwidth_coeff = primal_bandwidth_coeff
        self.dual_bandwidth = dual_bandwidth
        self.dual_bandwidth_coeff = dual_bandwidth_coeff
        self.record_metrics = record_metrics

    def fit(self, task: Task, seed: int = 0, loss=None):
        loss = loss or square_loss()
        rng = SeededRng(seed)
        probe = rng.substream(_STREAM_PROBE)
        pk = gaussian(resolve_bandwidth(task, "primal", self.primal_bandwidth,
                                        self.primal_bandwidth_coeff, probe))
        dk = gaussian(resolve_bandwidth(task, "dual", self.dual_bandwidth,
                                        self.dual_bandwidth_coeff, probe))
        primal = DoublyModel(pk, task.primal_dim, rng.substream(_STREAM_PRIMAL_FEATURES))
        dual = DoublyModel(dk, task.dual_dim, rng.substream(_STREAM_DUAL_FEATURES))
        schedule = StepSchedule(self.schedule_form, self.step_scale, self.step_n0)
        sampling = rng.substream(_STREAM_SAMPLING)
        hooks = set(metric_iterations(self.t_max))
        trace = []
        for t in range(1, self.t_max + 1):
            gamma = schedule.step(t)
            batch = task.sample_batch(sampling, self.batch_size)
            a = batch.primal_values(primal)
            b = dual.evaluate_batch(batch.dual_x)
            _check_finite(a, t)
            _check_finite(b, t)
            rho = batch.rho if batch.rho is not None else np.ones(batch.size)

            omega_p, phase_p = primal.feature_for(t)
            psi_hat = np.zeros(batch.size)
            for g in batch.groups:
                psi_hat += g.weights * np.sqrt(2.0) * np.cos(g.points @ omega_p + phase_p)
            alpha = -(gamma / batch.size) * float(np.sum(rho * b * psi_hat))

            omega_d, phase_d = dual.feature_for(t)
            phi_hat = np.sqrt(2.0) * np.cos(batch.dual_x @ omega_d + phase_d)
            beta = (gamma / batch.size) * float(
                np.sum(rho * (a - loss.conjugate_grad(batch.y, b)) * phi_hat)
            )

            # Decay existing coefficients, then append the fresh ones
            # (the new coefficient is not decayed at its own iteration).
            primal.decay(1.0 - gamma * self.lam1)
            dual.decay(1.0 - gamma * self.lam2)
            primal.append(t, alpha)
            dual.append(t, beta)

            if self.record_metrics and t in hooks:
                trace.append(
                    (t * self.batch_size, task.metric_name,
                     float(task.test_metric(primal.evaluate_batch)))
                )
        self.primal_ = primal
        self.dual_ = dual
        self.report_ = SolverReport(
            self.solver_name, task.metric_name, primal, dual, trace
        )
        return self


def doubly_sgd_run(task, loss, schedule: StepSchedule, lam1, lam2, t_max, seed=0,
                   primal_bandwidth=None, dual_bandwidth=None) -> SolverReport:
    solver = DoublySGD(
        schedule_form=schedule.form,
        step_scale=schedule.scale,
        step_n0=schedule.n0 if schedule.n0 else 1.0,
        lam1=lam1,
        lam2=lam2,
        t_max=t_max,
        primal_bandwidth=primal_bandwidth,
        dual_bandwidth=dual_bandwidth,
    )
    return solver.fit(task, seed=seed, loss=loss).report_
