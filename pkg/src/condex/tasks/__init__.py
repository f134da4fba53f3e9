from .base import SampleBatch, Task, TermGroup, TripletSample, encode_dual
from .chains import (
    ChainSpec,
    hitting_time_oracle,
    is_irreducible,
    is_primitive,
    linear_bellman_oracle,
    load_chain,
    one_hot,
    optimal_transition,
    random_irreducible_chain,
    save_chain,
    stationary_distribution,
    tabular_value,
)
from .discrete_toy import DiscreteToyTask
from .gp_denoise import GpDenoiseTask, TrigExpansion
from .hitting_time import HittingTimeTask, hitting_time_task
from .linear_bellman import LinearBellmanTask, linear_bellman_task
from .quadrature import GaussianQuadrature
from .robust_regression import RobustRegressionTask, clean_curve

__all__ = [
    "ChainSpec",
    "DiscreteToyTask",
    "GaussianQuadrature",
    "GpDenoiseTask",
    "HittingTimeTask",
    "LinearBellmanTask",
    "RobustRegressionTask",
    "SampleBatch",
    "Task",
    "TermGroup",
    "TrigExpansion",
    "TripletSample",
    "clean_curve",
    "encode_dual",
    "hitting_time_oracle",
    "hitting_time_task",
    "is_irreducible",
    "is_primitive",
    "linear_bellman_oracle",
    "linear_bellman_task",
    "load_chain",
    "one_hot",
    "optimal_transition",
    "random_irreducible_chain",
    "save_chain",
    "stationary_distribution",
    "tabular_value",
]
