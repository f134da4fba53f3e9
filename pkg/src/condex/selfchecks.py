"""Fast invariant suite behind ``condex selfcheck``.

Each check is a no-argument callable raising on failure; the CLI prints one
PASS/FAIL line per entry. These are smoke-level versions of the full pytest
suite, sized to run in a few seconds.
"""

from __future__ import annotations

import numpy as np

from .features import rff_sample
from .gap import interchangeability_check, primal_min_closed_form, primal_min_pgd, tabular_gap
from .kernels import cross_gram, gaussian, gram
from .losses import conjugate_oracle, square_loss
from .models import KernelExpansion
from .rng import SeededRng, gaussian_draw
from .schedules import StepSchedule
from .tasks import DiscreteToyTask, hitting_time_oracle, random_irreducible_chain
from .tasks.chains import stationary_distribution


def check_rng_determinism():
    a = SeededRng(7, 3).standard_normal(32)
    b = SeededRng(7, 3).standard_normal(32)
    assert np.array_equal(a, b), "identical keys must replay identical draws"
    sub = SeededRng(7, 3).substream(5).standard_normal(4)
    sub2 = SeededRng(7, 3).substream(5).standard_normal(4)
    assert np.array_equal(sub, sub2), "substream replay failed"


def check_gaussian_draw_moments():
    rng = SeededRng(11)
    draws = np.array([gaussian_draw(rng, [0.0], 1.0)[0] for _ in range(20000)])
    assert abs(draws.mean()) < 0.05, f"sample mean {draws.mean():.3f} too far from 0"


def check_gram_psd():
    rng = SeededRng(3)
    x = rng.standard_normal((12, 3))
    eigs = np.linalg.eigvalsh(gram(gaussian(0.8), x))
    assert eigs.min() >= -1e-10, f"Gram matrix not PSD: min eig {eigs.min():.2e}"


def check_rff_accuracy():
    kernel = gaussian(1.0)
    fm = rff_sample(kernel, 2000, seed=5, input_dim=2)
    rng = SeededRng(6)
    x = rng.standard_normal((20, 2))
    approx = fm.kernel_estimate(x, x)
    exact = cross_gram(kernel, x, x)
    err = np.max(np.abs(approx - exact))
    assert err <= 0.1, f"RFF error {err:.3f} exceeds 0.1"


def check_fenchel_young():
    loss = square_loss()
    rng = SeededRng(9)
    y, v, u = rng.standard_normal(3)
    assert loss.value(y, v) + loss.conjugate(y, u) >= u * v - 1e-12
    est = conjugate_oracle(loss.value, 1.0, 2.0)
    assert abs(est.value - loss.conjugate(1.0, 2.0)) <= 2e-3 and not est.boundary_hit


def check_norm_cache():
    rng = SeededRng(13)
    model = KernelExpansion(gaussian(0.7), 2)
    for _ in range(200):
        p = rng.standard_normal(2)
        model.add_scaled_section(p, float(rng.standard_normal(1)[0]) * 0.2,
                                 model.evaluate(p))
        if rng.uniform() < 0.2:
            model.shrink(0.9)
        if rng.uniform() < 0.2:
            model.project_ball(4.0)
    drift = abs(model.sq_norm - model.recompute_sq_norm()) / max(model.sq_norm, 1e-12)
    assert drift <= 1e-6, f"norm cache drift {drift:.2e}"


def check_schedules_monotone():
    for sched in (StepSchedule("gamma_over_sqrt_t", 2.0),
                  StepSchedule("eta_over_n0_plus_sqrt_t", 1.0, 10.0),
                  StepSchedule("eta_over_n0_plus_t", 1.0, 10.0)):
        steps = np.array([sched.step(t) for t in range(1, 2000)])
        assert np.all(steps > 0) and np.all(np.diff(steps) <= 0)


def check_hitting_time_oracle():
    rng = SeededRng(21)
    chain = random_irreducible_chain(5, rng)
    h, pi = hitting_time_oracle(chain)
    assert np.max(np.abs(pi - stationary_distribution(chain.transition))) <= 1e-10
    assert np.all(h >= 1.0 - 1e-12)


def check_interchangeability():
    atoms = [1.0, 2.0]
    lhs, rhs = interchangeability_check(
        atoms, [0.5, 0.5], lambda u, xi: u * xi - 0.5 * u * u)
    assert abs(lhs - 1.25) <= 1e-9 and abs(lhs - rhs) <= 1e-9


def check_gap_certificate():
    task = DiscreteToyTask()
    primal, dual = task.exact_models()
    delta_f, _ = task.ball_radii()
    gap = tabular_gap(task, primal, dual, delta_f)
    assert abs(gap) <= 1e-8, f"gap at the exact saddle point is {gap:.2e}"
    u = dual.evaluate_batch(task.dual_encodings) + 0.3
    closed = primal_min_closed_form(task, u, delta_f)
    pgd = primal_min_pgd(task, u, delta_f)
    assert abs(closed - pgd) <= 1e-9, "gap inner-min routes disagree"


CHECKS = [
    ("rng determinism and substream replay", check_rng_determinism),
    ("gaussian draw law of large numbers", check_gaussian_draw_moments),
    ("gram matrices are PSD", check_gram_psd),
    ("random Fourier feature accuracy", check_rff_accuracy),
    ("Fenchel-Young and conjugate oracle", check_fenchel_young),
    ("kernel expansion norm cache", check_norm_cache),
    ("step schedules positive and non-increasing", check_schedules_monotone),
    ("hitting-time oracle vs stationary distribution", check_hitting_time_oracle),
    ("interchangeability equality", check_interchangeability),
    ("saddle gap certificate at the optimum", check_gap_certificate),
]
