"""Saddle-point gap on enumerable tasks, and the interchangeability check.

The gap of a candidate pair (f, u) is
``max_u' Phi(f, u') - min_{f' in ball} Phi(f', u)``. On a finite task with
square loss the inner max has a per-point closed form (the maximizing dual is
the residual v - y, giving exactly the primal objective), and Phi(., u) is
linear in the primal values, so the inner min over the RKHS ball is a linear
program over an ellipsoid with closed-form solution. A projected-gradient
oracle for the inner min is kept alongside as an independent route.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar


def _enumeration(task):
    needed = ("z_encodings", "dual_encodings", "x_probs", "cond_matrix", "y_values",
              "primal_gram")
    if not all(hasattr(task, a) for a in needed):
        raise ValueError(f"task {getattr(task, 'name', task)!r} is not enumerable")
    return (task.z_encodings, task.dual_encodings, np.asarray(task.x_probs),
            np.asarray(task.cond_matrix), np.asarray(task.y_values),
            np.asarray(task.primal_gram))


def _dual_linear_coeffs(q, cond, u):
    # Gradient of Phi(., u) w.r.t. the primal values at the z atoms.
    return cond.T @ (q * u)


def _dual_constant(q, y, u):
    return -float(q @ (u * y + 0.5 * u**2))


def primal_min_closed_form(task, u_values, delta_f) -> float:
    """min over {||f||^2 <= delta_f} of Phi(f, u): linear over an ellipsoid."""
    _, _, q, cond, y, k = _enumeration(task)
    g = _dual_linear_coeffs(q, cond, np.asarray(u_values))
    c = _dual_constant(q, y, np.asarray(u_values))
    quad = float(g @ k @ g)
    return c - np.sqrt(max(delta_f * quad, 0.0))


def primal_min_pgd(task, u_values, delta_f, n_steps=100000, tol=1e-15) -> float:
    """Projected-gradient oracle for the same inner min, in the RKHS geometry.

    Iterates on the primal values w: the RKHS gradient direction of the
    linear objective is K g, and the ball projection is the coefficient
    rescale w <- w * sqrt(delta_f / (w^T K^-1 w)).
    """
    _, _, q, cond, y, k = _enumeration(task)
    u = np.asarray(u_values)
    g = _dual_linear_coeffs(q, cond, u)
    c = _dual_constant(q, y, u)
    kg = k @ g
    quad = float(g @ kg)
    if quad == 0.0:
        return c
    k_inv = np.linalg.inv(k)
    # Scale-aware step: large relative to the ball radius so the projected
    # iterate aligns with -Kg geometrically fast.
    step = 10.0 * np.sqrt(delta_f / quad)
    w = np.zeros(k.shape[0])
    prev = np.inf
    for _ in range(n_steps):
        w = w - step * kg
        norm_sq = float(w @ k_inv @ w)
        if norm_sq > delta_f:
            w *= np.sqrt(delta_f / norm_sq)
        value = c + float(g @ w)
        if abs(value - prev) <= tol * max(1.0, abs(value)):
            break
        prev = value
    return value


def tabular_gap(task, primal_model, dual_model, delta_f) -> float:
    """Saddle gap of (primal, dual) on an enumerable square-loss task.

    Inner max in closed form per support point; inner min over the primal
    ball in closed form (PGD oracle cross-checks it in the test suite).
    Always >= 0 up to rounding.
    """
    z_enc, dual_enc, q, cond, y, _ = _enumeration(task)
    w = primal_model.evaluate_batch(z_enc)
    u = dual_model.evaluate_batch(dual_enc)
    v = cond @ w
    sup_term = float(q @ (0.5 * (v - y) ** 2))
    inf_term = primal_min_closed_form(task, u, delta_f)
    return sup_term - inf_term


def _refine_max(g, xi, lo, hi):
    res = minimize_scalar(
        lambda u: -g(u, xi), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x), float(-res.fun)


def interchangeability_check(xi_atoms, probs, g, u_range=(-50.0, 50.0), n_grid=2001):
    """Compare E[max_u g(u, xi)] against the max over tabular functions.

    Left side: per-atom scalar maximization (coarse grid, then bounded local
    refinement). Right side: build the pointwise-argmax table u*(xi) first,
    then take the expectation of g(u*(xi), xi). Returns (lhs, rhs) for an
    equality assertion.
    """
    probs = np.asarray(probs, dtype=np.float64)
    lo, hi = u_range
    grid = np.linspace(lo, hi, n_grid)
    maxima = []
    argmaxes = []
    for xi in xi_atoms:
        vals = np.array([g(u, xi) for u in grid])
        j = int(np.argmax(vals))
        a = grid[max(j - 1, 0)]
        b = grid[min(j + 1, n_grid - 1)]
        u_star, val = _refine_max(g, xi, a, b)
        maxima.append(val)
        argmaxes.append(u_star)
    lhs = float(probs @ np.asarray(maxima))
    table = dict(zip(range(len(argmaxes)), argmaxes))
    rhs = float(
        sum(p * g(table[i], xi) for i, (p, xi) in enumerate(zip(probs, xi_atoms)))
    )
    return lhs, rhs
