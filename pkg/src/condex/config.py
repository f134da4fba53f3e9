"""Experiment configuration: flat ``key = value`` text with dotted sections.

Values parse as JSON scalars (bare words fall back to strings); list values
inside solver sections declare sweep grids. Unknown keys are rejected with
the offending line number. Solver parameter names are validated against the
estimator signatures themselves, so the schema cannot drift from the code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List

from .exceptions import ConfigError
from .mdp_embedding import KernelMDPPolicyEval
from .rl import GTD2, NavigationMDP, PolicyEvaluationTask, ResidualGradient
from .rng import SeededRng
from .solvers import SAASolver, DoublySGD, EmbeddingSGD, VirtualSampleSGD
from .tasks import (
    DiscreteToyTask,
    GpDenoiseTask,
    HittingTimeTask,
    LinearBellmanTask,
    RobustRegressionTask,
    load_chain,
    random_irreducible_chain,
)
from .tasks.chains import ChainSpec, random_boundary_chain

SOLVER_REGISTRY = {
    "embedding_sgd": EmbeddingSGD,
    "virtual_sgd": VirtualSampleSGD,
    "sgd_saa": SAASolver,
    "doubly_sgd": DoublySGD,
    "gtd2": GTD2,
    "residual_gradient": ResidualGradient,
    "kernel_mdp": KernelMDPPolicyEval,
}

_EXPERIMENT_KEYS = {
    "trials": int,
    "master_seed": int,
    "output_dir": str,
    "sweep_trials": int,
}

_TASK_KEYS = {
    "gp_denoise": {"seed": int, "cond_scale": float, "second_moment": str,
                   "metric_nodes": int},
    "robust_regression": {"x_noise": float, "y_noise": float, "cond_scale": float,
                          "second_moment": str},
    "hitting_time": {"n_states": int, "chain_seed": int, "chain_file": str,
                     "successor_rule": str},
    "linear_bellman": {"n_states": int, "chain_seed": int, "chain_file": str},
    "discrete_toy": {"kernel_bandwidth": float},
    "navigation": {"state_var": float, "transition_var": float, "gamma_disc": float,
                   "dual_inputs": str, "eval_seed": int, "n_eval_states": int,
                   "n_eval_successors": int},
}


@dataclass
class ExperimentConfig:
    task_name: str
    task_params: Dict = field(default_factory=dict)
    solvers: Dict[str, Dict] = field(default_factory=dict)  # name -> params
    trials: int = 1
    master_seed: int = 0
    output_dir: str = "results"
    sweep_trials: int = 0  # 0: same as trials

    def build_task(self):
        return build_task(self.task_name, self.task_params)

    def build_solver(self, name: str, overrides: Dict | None = None):
        params = dict(self.solvers[name])
        if overrides:
            params.update(overrides)
        return SOLVER_REGISTRY[name](**params)

    def sweep_grids(self) -> Dict[str, Dict[str, List]]:
        """Per-solver {param: grid}; scalar params are not grids."""
        grids = {}
        for name, params in self.solvers.items():
            grids[name] = {k: v for k, v in params.items() if isinstance(v, list)}
        return grids

    def has_grids(self) -> bool:
        return any(g for g in self.sweep_grids().values())

    def fixed_solver_params(self, name: str) -> Dict:
        return {k: v for k, v in self.solvers[name].items() if not isinstance(v, list)}


def _parse_scalar(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_config_text(text: str) -> ExperimentConfig:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        entries.append((lineno, key, _parse_scalar(value)))

    cfg = ExperimentConfig(task_name="")
    seen = set()
    for lineno, key, value in entries:
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        seen.add(key)
        parts = key.split(".")
        if parts[0] == "experiment" and len(parts) == 2:
            if parts[1] == "trials":
                cfg.trials = _coerce(int, key, value, lineno)
            elif parts[1] == "master_seed":
                cfg.master_seed = _coerce(int, key, value, lineno)
            elif parts[1] == "output_dir":
                cfg.output_dir = _coerce(str, key, value, lineno)
            elif parts[1] == "sweep_trials":
                cfg.sweep_trials = _coerce(int, key, value, lineno)
            else:
                raise ConfigError(f"unknown key {key!r}", lineno)
        elif parts[0] == "task":
            if len(parts) == 2 and parts[1] == "name":
                if value not in _TASK_KEYS:
                    raise ConfigError(
                        f"unknown task {value!r} (known: {sorted(_TASK_KEYS)})", lineno)
                cfg.task_name = value
            elif len(parts) == 2:
                cfg.task_params[parts[1]] = (lineno, value)
            else:
                raise ConfigError(f"unknown key {key!r}", lineno)
        elif parts[0] == "solver" and len(parts) == 3:
            name, param = parts[1], parts[2]
            if name not in SOLVER_REGISTRY:
                raise ConfigError(
                    f"unknown solver {name!r} (known: {sorted(SOLVER_REGISTRY)})", lineno)
            valid = set(SOLVER_REGISTRY[name]().get_params())
            if param not in valid:
                raise ConfigError(
                    f"unknown parameter {param!r} for solver {name!r}", lineno)
            cfg.solvers.setdefault(name, {})[param] = value
        else:
            raise ConfigError(f"unknown key {key!r}", lineno)

    if not cfg.task_name:
        raise ConfigError("missing required key 'task.name'")
    if not cfg.solvers:
        raise ConfigError("no solver sections given")
    # validate task params against the task's whitelist
    allowed = _TASK_KEYS[cfg.task_name]
    checked = {}
    for pname, (lineno, value) in cfg.task_params.items():
        if pname not in allowed:
            raise ConfigError(
                f"unknown parameter {pname!r} for task {cfg.task_name!r}", lineno)
        checked[pname] = _coerce(allowed[pname], f"task.{pname}", value, lineno)
    cfg.task_params = checked
    if cfg.trials < 1:
        raise ConfigError("experiment.trials must be >= 1")
    if cfg.sweep_trials == 0:
        cfg.sweep_trials = cfg.trials
    return cfg


def _coerce(typ, key, value, lineno):
    if typ is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if typ is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if typ is str and isinstance(value, str):
        return value
    raise ConfigError(f"{key} expects {typ.__name__}, got {value!r}", lineno)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())


def config_to_json(cfg: ExperimentConfig) -> str:
    """JSON export of a parsed configuration (provenance record)."""
    return json.dumps(
        {
            "experiment": {
                "trials": cfg.trials,
                "master_seed": cfg.master_seed,
                "output_dir": cfg.output_dir,
                "sweep_trials": cfg.sweep_trials,
            },
            "task": {"name": cfg.task_name, **cfg.task_params},
            "solvers": cfg.solvers,
        },
        indent=2,
        sort_keys=True,
    )


def build_task(name: str, params: Dict):
    params = dict(params)
    if name == "gp_denoise":
        return GpDenoiseTask(**params)
    if name == "robust_regression":
        return RobustRegressionTask(**params)
    if name == "discrete_toy":
        return DiscreteToyTask(**params)
    if name == "hitting_time":
        chain = _chain_from_params(params, boundary=False)
        rule = params.pop("successor_rule", "clamp")
        return HittingTimeTask(chain, successor_rule=rule)
    if name == "linear_bellman":
        chain = _chain_from_params(params, boundary=True)
        return LinearBellmanTask(chain)
    if name == "navigation":
        mdp = NavigationMDP(params.pop("state_var", 0.2),
                            params.pop("transition_var", 0.1),
                            params.pop("gamma_disc", 0.9))
        return PolicyEvaluationTask(mdp, dual_inputs=params.pop("dual_inputs", "s"),
                                    **params)
    raise ConfigError(f"unknown task {name!r}")


def _chain_from_params(params: Dict, boundary: bool) -> ChainSpec:
    if "chain_file" in params:
        path = params.pop("chain_file")
        params.pop("n_states", None)
        params.pop("chain_seed", None)
        return load_chain(path)
    n = params.pop("n_states", 6 if boundary else 5)
    seed = params.pop("chain_seed", 0)
    rng = SeededRng(seed, stream_id=9)
    if boundary:
        return random_boundary_chain(n, rng)
    return random_irreducible_chain(n, rng)
