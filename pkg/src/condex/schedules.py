"""Step-size schedules. All forms emit positive, non-increasing sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_positive

GAMMA_OVER_SQRT_T = "gamma_over_sqrt_t"
ETA_OVER_N0_PLUS_SQRT_T = "eta_over_n0_plus_sqrt_t"
ETA_OVER_N0_PLUS_T = "eta_over_n0_plus_t"
CONSTANT = "constant"

FORMS = (GAMMA_OVER_SQRT_T, ETA_OVER_N0_PLUS_SQRT_T, ETA_OVER_N0_PLUS_T, CONSTANT)


@dataclass(frozen=True)
class StepSchedule:
    """gamma_over_sqrt_t: g/sqrt(t); eta_over_n0_plus_[sqrt_]t: eta/(n0+[sqrt]t).

    ``constant`` holds the first parameter fixed (the per-horizon tuning of
    the 1/sqrt(t) analysis uses a constant step g/sqrt(t_max)).
    """

    form: str
    scale: float
    n0: float = 0.0

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown schedule form {self.form!r}")
        check_positive(self.scale, "scale")
        if self.form in (ETA_OVER_N0_PLUS_SQRT_T, ETA_OVER_N0_PLUS_T):
            check_positive(self.n0, "n0")

    def step(self, t: int) -> float:
        """Step size for 1-based iteration ``t``."""
        if t < 1:
            raise ValueError(f"iteration index must be >= 1, got {t}")
        if self.form == GAMMA_OVER_SQRT_T:
            return self.scale / np.sqrt(t)
        if self.form == ETA_OVER_N0_PLUS_SQRT_T:
            return self.scale / (self.n0 + np.sqrt(t))
        if self.form == ETA_OVER_N0_PLUS_T:
            return self.scale / (self.n0 + t)
        return self.scale


def gamma_over_sqrt_t(gamma: float) -> StepSchedule:
    return StepSchedule(GAMMA_OVER_SQRT_T, gamma)


def eta_over_n0_plus_sqrt_t(eta: float, n0: float) -> StepSchedule:
    return StepSchedule(ETA_OVER_N0_PLUS_SQRT_T, eta, n0)


def eta_over_n0_plus_t(eta: float, n0: float) -> StepSchedule:
    return StepSchedule(ETA_OVER_N0_PLUS_T, eta, n0)


def constant(gamma: float) -> StepSchedule:
    return StepSchedule(CONSTANT, gamma)
