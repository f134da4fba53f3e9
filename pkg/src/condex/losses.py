"""Convex losses presented through their Fenchel conjugates.

The saddle reformulation only ever touches a loss through three maps:
``value(y, v)``, ``conjugate(y, u)`` and ``conjugate_grad(y, u)``. The square
loss ships built in; anything convex with those three maps plugs in the same
way.
"""

from __future__ import annotations

from typing import NamedTuple, Protocol

import numpy as np


class FenchelLoss(Protocol):
    def value(self, y, v): ...

    def conjugate(self, y, u): ...

    def conjugate_grad(self, y, u): ...


class SquareLoss:
    """value = (1/2)(y - v)^2, conjugate = u*y + (1/2)u^2, grad = y + u.

    All three maps broadcast over numpy arrays.
    """

    name = "square"

    def value(self, y, v):
        return 0.5 * (y - v) ** 2

    def conjugate(self, y, u):
        return u * y + 0.5 * u**2

    def conjugate_grad(self, y, u):
        return y + u


def square_loss() -> SquareLoss:
    return SquareLoss()


class ConjugateEstimate(NamedTuple):
    value: float
    boundary_hit: bool


def conjugate_oracle(
    loss_value,
    y: float,
    u: float,
    grid_halfwidth: float = 10.0,
    n_points: int = 20001,
) -> ConjugateEstimate:
    """Brute-force conjugate: max over a grid of ``u*v - loss_value(y, v)``.

    The grid spans ``[-h, +h]`` scaled by ``1 + |y| + |u|`` so the maximizer of
    the shipped loss stays interior; ``boundary_hit`` flags a maximum attained
    at either grid end, meaning the returned value is only a lower bound.
    """
    half = grid_halfwidth * (1.0 + abs(y) + abs(u))
    v = np.linspace(-half, half, n_points)
    objective = u * v - loss_value(y, v)
    best = int(np.argmax(objective))
    return ConjugateEstimate(float(objective[best]), best in (0, n_points - 1))
