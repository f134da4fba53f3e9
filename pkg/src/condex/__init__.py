"""condex: stochastic primal-dual solvers for learning from conditional
distributions, with benchmark tasks, exact oracles and baselines."""

from .exceptions import (
    ConfigError,
    DegenerateDataError,
    DivergenceError,
    NumericalError,
)
from .features import (
    RandomFourierFeatures,
    TabularPairFeatures,
    TabularStateFeatures,
    rff_sample,
)
from .gap import interchangeability_check, tabular_gap
from .kernels import Kernel, cross_gram, gaussian, gram, kernel_eval, laplacian, median_bandwidth
from .linalg import RegularizedFactor, solve_regularized
from .losses import FenchelLoss, SquareLoss, conjugate_oracle, square_loss
from .mdp_embedding import (
    DynamicsKernelEmbedding,
    KernelMDPPolicyEval,
    embed_dynamics_kernel,
    kernel_mdp_sgd_run,
)
from .models import AdaptiveFeatureModel, KernelExpansion, LinearFeatureModel
from .rl import (
    GTD2,
    ChainPolicyMDP,
    NavigationMDP,
    PolicyEvaluationTask,
    ResidualGradient,
    gtd2_step,
    msbe,
    navigation_spec,
    pe_triplet_adapter,
    residual_gradient_step,
)
from .rng import SeededRng, gaussian_draw, substream_id
from .schedules import StepSchedule
from .solvers import (
    DoublySGD,
    EmbeddingSGD,
    Projected,
    Regularized,
    SAASolver,
    SaddleState,
    SolverReport,
    VirtualSampleSGD,
    apply_saddle_step,
    doubly_sgd_run,
    embedding_sgd_step,
    run_saddle,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveFeatureModel",
    "ChainPolicyMDP",
    "ConfigError",
    "DegenerateDataError",
    "DivergenceError",
    "DoublySGD",
    "DynamicsKernelEmbedding",
    "EmbeddingSGD",
    "FenchelLoss",
    "GTD2",
    "Kernel",
    "KernelExpansion",
    "KernelMDPPolicyEval",
    "LinearFeatureModel",
    "NavigationMDP",
    "NumericalError",
    "PolicyEvaluationTask",
    "Projected",
    "RandomFourierFeatures",
    "Regularized",
    "RegularizedFactor",
    "ResidualGradient",
    "SAASolver",
    "SaddleState",
    "SeededRng",
    "SolverReport",
    "SquareLoss",
    "StepSchedule",
    "TabularPairFeatures",
    "TabularStateFeatures",
    "VirtualSampleSGD",
    "apply_saddle_step",
    "conjugate_oracle",
    "cross_gram",
    "doubly_sgd_run",
    "embed_dynamics_kernel",
    "embedding_sgd_step",
    "gaussian",
    "gaussian_draw",
    "gram",
    "gtd2_step",
    "interchangeability_check",
    "kernel_eval",
    "kernel_mdp_sgd_run",
    "laplacian",
    "median_bandwidth",
    "msbe",
    "navigation_spec",
    "pe_triplet_adapter",
    "residual_gradient_step",
    "rff_sample",
    "run_saddle",
    "solve_regularized",
    "square_loss",
    "substream_id",
    "tabular_gap",
]
