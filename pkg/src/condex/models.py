"""Function-space models for the primal and dual variables.

Three representations share one update surface:

* :class:`KernelExpansion` — growing weighted sum of kernel sections, with an
  exactly-maintained squared-norm cache (projection needs it every step).
* :class:`LinearFeatureModel` — fixed finite feature map with a weight vector
  (random Fourier or exact tabular features).
* :class:`AdaptiveFeatureModel` — one-layer cosine features whose frequencies
  and phases are trained jointly with the linear head.

The shared surface is: ``evaluate_batch``, ``add_sections`` (a gradient step
expressed as "add these weighted sections"), ``project_ball``, ``shrink``,
``accumulate_average`` and ``averaged_copy``. Step-size-weighted iterate
averages are tracked online so a run never stores more than one iterate.
"""

from __future__ import annotations

import numpy as np

from .kernels import Kernel, cross_gram, gram, kernel_eval
from .validation import as_float_matrix, as_float_vector


def _check_shrink_factor(factor):
    if not 0.0 < factor <= 1.0:
        raise ValueError(f"shrink factor must be in (0, 1], got {factor}")


def _check_delta(delta):
    if not delta > 0:
        raise ValueError(f"ball radius must be > 0, got {delta}")


class KernelExpansion:
    """f(x) = sum_j coeffs_j * k(support_j, x), with cached squared RKHS norm.

    The cache is updated incrementally on every mutation; ``add_sections``
    therefore needs the model's values at the added points *before* the
    mutation, which the solver has already computed during its step.
    """

    kind = "kernel_expansion"

    def __init__(self, kernel: Kernel, input_dim: int):
        self.kernel = kernel
        self.input_dim = int(input_dim)
        self._points = np.empty((0, self.input_dim))
        self._coeffs = np.empty(0)
        self._avg = np.empty(0)
        self._n = 0
        self._sq_norm = 0.0

    # -- storage ---------------------------------------------------------

    @property
    def n_support(self) -> int:
        return self._n

    @property
    def support(self) -> np.ndarray:
        return self._points[: self._n]

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs[: self._n]

    @property
    def avg_accumulator(self) -> np.ndarray:
        return self._avg[: self._n]

    def _grow(self, extra: int):
        need = self._n + extra
        cap = self._points.shape[0]
        if need <= cap:
            return
        new_cap = max(need, 2 * cap, 16)
        points = np.zeros((new_cap, self.input_dim))
        coeffs = np.zeros(new_cap)
        avg = np.zeros(new_cap)
        points[: self._n] = self._points[: self._n]
        coeffs[: self._n] = self._coeffs[: self._n]
        avg[: self._n] = self._avg[: self._n]
        self._points, self._coeffs, self._avg = points, coeffs, avg

    # -- evaluation ------------------------------------------------------

    def evaluate_batch(self, x) -> np.ndarray:
        x = as_float_matrix(x, "x")
        if x.shape[1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {x.shape[1]}")
        if self._n == 0:
            return np.zeros(x.shape[0])
        return cross_gram(self.kernel, x, self.support) @ self.coeffs

    def evaluate(self, x) -> float:
        return float(self.evaluate_batch(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])

    # -- mutation --------------------------------------------------------

    def add_scaled_section(self, point, c: float, value_at_point: float):
        """Append one section; ``value_at_point`` is f(point) before the add."""
        point = as_float_vector(point, "point")
        self._grow(1)
        self._points[self._n] = point
        self._coeffs[self._n] = c
        self._avg[self._n] = 0.0
        self._n += 1
        self._sq_norm += 2.0 * c * value_at_point + c * c * kernel_eval(self.kernel, point, point)

    def add_sections(self, points, coeffs, values_at_points):
        """Append a batch of sections (one gradient step may carry several).

        ``values_at_points`` are pre-mutation model values at ``points``. The
        norm cache picks up both the cross term against the existing function
        and the within-batch Gram coupling. Exact-zero coefficients are
        dropped: they change neither the function nor the norm.
        """
        points = as_float_matrix(points, "points")
        coeffs = np.asarray(coeffs, dtype=np.float64).reshape(-1)
        values = np.asarray(values_at_points, dtype=np.float64).reshape(-1)
        keep = coeffs != 0.0
        if not np.all(keep):
            points, coeffs, values = points[keep], coeffs[keep], values[keep]
        b = points.shape[0]
        if b == 0:
            return
        self._sq_norm += 2.0 * float(coeffs @ values) + float(
            coeffs @ gram(self.kernel, points) @ coeffs
        )
        self._grow(b)
        self._points[self._n : self._n + b] = points
        self._coeffs[self._n : self._n + b] = coeffs
        self._avg[self._n : self._n + b] = 0.0
        self._n += b

    def shrink(self, factor: float):
        _check_shrink_factor(factor)
        if factor == 1.0:
            return
        self._coeffs[: self._n] *= factor
        self._sq_norm *= factor * factor

    def project_ball(self, delta: float):
        _check_delta(delta)
        if self._sq_norm <= delta:
            return
        scale = np.sqrt(delta / self._sq_norm)
        self._coeffs[: self._n] *= scale
        self._sq_norm = delta

    def accumulate_average(self, gamma: float):
        self._avg[: self._n] += gamma * self._coeffs[: self._n]

    def averaged_copy(self, gamma_sum: float) -> "KernelExpansion":
        """Step-size-weighted average of all iterates, as a fresh expansion.

        Its norm cache is recomputed lazily (the average is for evaluation;
        nothing projects it).
        """
        out = KernelExpansion(self.kernel, self.input_dim)
        out._grow(self._n)
        out._points[: self._n] = self.support
        out._coeffs[: self._n] = self.avg_accumulator / gamma_sum
        out._n = self._n
        out._sq_norm = None
        return out

    # -- norms -----------------------------------------------------------

    @property
    def sq_norm(self) -> float:
        if self._sq_norm is None:
            self._sq_norm = self.recompute_sq_norm()
        return self._sq_norm

    def recompute_sq_norm(self, block: int = 2048) -> float:
        """alpha^T K alpha from scratch (audit path; blockwise for memory)."""
        total = 0.0
        a = self.coeffs
        pts = self.support
        for start in range(0, self._n, block):
            stop = min(start + block, self._n)
            total += a[start:stop] @ cross_gram(self.kernel, pts[start:stop], pts) @ a
        return float(total)

    # -- serialization ---------------------------------------------------

    def to_text(self) -> str:
        """Flat text record; floats in hex for an exact round-trip."""
        lines = [
            "condex kernel_expansion 1",
            f"kernel {self.kernel.family} {self.kernel.bandwidth.hex()}",
            f"dim {self.input_dim}",
            f"n {self._n}",
        ]
        for j in range(self._n):
            coords = " ".join(v.hex() for v in self._points[j])
            lines.append(f"{self._coeffs[j].hex()} {coords}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "KernelExpansion":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].split() != ["condex", "kernel_expansion", "1"]:
            raise ValueError("not a kernel_expansion record")
        _, family, bw = lines[1].split()
        dim = int(lines[2].split()[1])
        n = int(lines[3].split()[1])
        model = cls(Kernel(family, float.fromhex(bw)), dim)
        if n == 0:
            return model
        coeffs = np.empty(n)
        points = np.empty((n, dim))
        for j, ln in enumerate(lines[4 : 4 + n]):
            parts = ln.split()
            coeffs[j] = float.fromhex(parts[0])
            points[j] = [float.fromhex(p) for p in parts[1:]]
        model._grow(n)
        model._points[:n] = points
        model._coeffs[:n] = coeffs
        model._n = n
        model._sq_norm = model.recompute_sq_norm()
        return model


class LinearFeatureModel:
    """f(x) = weights . phi(x) for a fixed finite feature map phi."""

    kind = "linear_feature"

    def __init__(self, feature_map):
        self.feature_map = feature_map
        self.input_dim = feature_map.input_dim
        self.weights = np.zeros(feature_map.n_features)
        self._avg = np.zeros(feature_map.n_features)

    def evaluate_batch(self, x) -> np.ndarray:
        return self.feature_map.transform(x) @ self.weights

    def evaluate(self, x) -> float:
        return float(self.feature_map.transform_single(x) @ self.weights)

    def add_sections(self, points, coeffs, values_at_points=None):
        coeffs = np.asarray(coeffs, dtype=np.float64).reshape(-1)
        if coeffs.shape[0] == 0:
            return
        self.weights += self.feature_map.transform(points).T @ coeffs

    def add_scaled_section(self, point, c: float, value_at_point: float = 0.0):
        self.weights += c * self.feature_map.transform_single(point)

    def shrink(self, factor: float):
        _check_shrink_factor(factor)
        self.weights *= factor

    def project_ball(self, delta: float):
        _check_delta(delta)
        norm = float(self.weights @ self.weights)
        if norm > delta:
            self.weights *= np.sqrt(delta / norm)

    def accumulate_average(self, gamma: float):
        self._avg += gamma * self.weights

    def averaged_copy(self, gamma_sum: float) -> "LinearFeatureModel":
        out = LinearFeatureModel(self.feature_map)
        out.weights = self._avg / gamma_sum
        return out

    @property
    def sq_norm(self) -> float:
        return float(self.weights @ self.weights)


class AdaptiveFeatureModel:
    """One-layer cosine features trained jointly with the linear head.

    f(x) = sum_i theta_i * sqrt(2/m) cos(W_i . x + b_i); ``add_sections``
    moves (theta, W, b) along the exact analytic gradient of the requested
    section sum, all partials taken at the pre-update parameters.
    """

    kind = "adaptive_feature"

    def __init__(self, n_features: int, input_dim: int, frequencies, phases):
        self.n_features = int(n_features)
        self.input_dim = int(input_dim)
        self.theta = np.zeros(self.n_features)
        self.frequencies = np.array(frequencies, dtype=np.float64)
        self.phases = np.array(phases, dtype=np.float64)
        self._avg = np.zeros(self.n_features)
        self._scale = np.sqrt(2.0 / self.n_features)

    @classmethod
    def from_kernel(cls, kernel: Kernel, n_features: int, input_dim: int, seed: int):
        from .features import RandomFourierFeatures

        fm = RandomFourierFeatures(kernel, n_features, input_dim, seed)
        return cls(n_features, input_dim, fm.frequencies_, fm.phases_)

    def features(self, x) -> np.ndarray:
        x = as_float_matrix(x, "x")
        return self._scale * np.cos(x @ self.frequencies.T + self.phases)

    def evaluate_batch(self, x) -> np.ndarray:
        return self.features(x) @ self.theta

    def evaluate(self, x) -> float:
        return float(self.evaluate_batch(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])

    def adaptive_gradients(self, x, upstream: float):
        """Exact partials of ``upstream * f(x)`` w.r.t. (theta, W, b)."""
        x = as_float_vector(x, "x")
        arg = self.frequencies @ x + self.phases
        phi = self._scale * np.cos(arg)
        dphi = -self._scale * np.sin(arg)
        g_theta = upstream * phi
        g_b = upstream * self.theta * dphi
        g_w = g_b[:, None] * x[None, :]
        return g_theta, g_w, g_b

    def add_sections(self, points, coeffs, values_at_points=None):
        points = as_float_matrix(points, "points")
        coeffs = np.asarray(coeffs, dtype=np.float64).reshape(-1)
        if coeffs.shape[0] == 0:
            return
        arg = points @ self.frequencies.T + self.phases
        phi = self._scale * np.cos(arg)
        dphi = -self._scale * np.sin(arg)
        g_b_rows = dphi * self.theta  # (n, m): per-point b-gradient rows
        self.theta += phi.T @ coeffs
        self.phases += g_b_rows.T @ coeffs
        self.frequencies += (g_b_rows * coeffs[:, None]).T @ points

    def shrink(self, factor: float):
        _check_shrink_factor(factor)
        self.theta *= factor

    def project_ball(self, delta: float):
        _check_delta(delta)
        norm = float(self.theta @ self.theta)
        if norm > delta:
            self.theta *= np.sqrt(delta / norm)

    def accumulate_average(self, gamma: float):
        self._avg += gamma * self.theta

    def averaged_copy(self, gamma_sum: float) -> "AdaptiveFeatureModel":
        # Features move during training, so only the head is averaged; the
        # average pairs the final features with the averaged head.
        out = AdaptiveFeatureModel(
            self.n_features, self.input_dim, self.frequencies, self.phases
        )
        out.theta = self._avg / gamma_sum
        return out

    @property
    def sq_norm(self) -> float:
        return float(self.theta @ self.theta)
