"""Experiment runner CLI.

Subcommands:
  run <config>     execute the solver x task matrix over trials, write CSVs
  sweep <config>   expand per-solver grids, run each cell, report best cells
  oracle <task>    print exact-solution certificates for a task
  selfcheck        run the fast invariant suite

Exit codes: 0 ok, 2 usage/config error, 3 numeric failure. Trials and sweep
cells run in a thread pool sized by CONDEX_THREADS (default: logical cores);
outputs are merged in deterministic (cell, trial) order either way.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, config_to_json, load_config
from .exceptions import ConfigError, DivergenceError, NumericalError

TRACE_HEADER = "trial,solver,samples_seen,metric,value"
SUMMARY_HEADER = "solver,metric,mean,stderr"
SWEEP_HEADER = "solver,cell,params,metric,mean,best"


def _pool_size() -> int:
    raw = os.environ.get("CONDEX_THREADS", "")
    if raw:
        try:
            size = int(raw)
        except ValueError as err:
            raise ConfigError(f"CONDEX_THREADS must be an integer, got {raw!r}") from err
        if size < 1:
            raise ConfigError("CONDEX_THREADS must be >= 1")
        return size
    return os.cpu_count() or 1


def _fmt(value: float) -> str:
    return repr(float(value))


def _run_one(cfg: ExperimentConfig, solver_name: str, overrides, trial: int):
    task = cfg.build_task()
    solver = cfg.build_solver(solver_name, overrides)
    try:
        solver.fit(task, seed=cfg.master_seed + trial)
    except DivergenceError as err:
        return getattr(err, "partial_trace", []), str(err)
    return solver.report_, None


def run_experiment(cfg: ExperimentConfig, out_dir: Path) -> int:
    """Fit every configured solver for every trial; write trace + summary CSVs.

    A diverged trial keeps its partial trace, is flagged in status.txt, and
    turns the exit code to 3.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(name, trial) for name in sorted(cfg.solvers) for trial in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=_pool_size()) as pool:
        futures = {
            (name, trial): pool.submit(_run_one, cfg, name, None, trial)
            for name, trial in jobs
        }
        outcomes = {key: fut.result() for key, fut in futures.items()}

    trace_lines = [TRACE_HEADER]
    finals = {}
    failures = []
    for name in sorted(cfg.solvers):
        for trial in range(cfg.trials):
            report, failure = outcomes[(name, trial)]
            if failure is not None:
                for samples_seen, metric, value in report:
                    trace_lines.append(
                        f"{trial},{name},{samples_seen},{metric},{_fmt(value)}")
                failures.append(f"{name} trial {trial}: {failure}")
                continue
            for samples_seen, metric, value in report.trace:
                trace_lines.append(
                    f"{trial},{name},{samples_seen},{metric},{_fmt(value)}")
            finals.setdefault((name, report.metric_name), []).append(report.final_value)

    summary_lines = [SUMMARY_HEADER]
    for (name, metric), values in sorted(finals.items()):
        arr = np.asarray(values)
        stderr = arr.std(ddof=1) / np.sqrt(arr.size) if arr.size > 1 else 0.0
        summary_lines.append(f"{name},{metric},{_fmt(arr.mean())},{_fmt(stderr)}")

    (out_dir / "trace.csv").write_text("\n".join(trace_lines) + "\n")
    (out_dir / "summary.csv").write_text("\n".join(summary_lines) + "\n")
    (out_dir / "config.json").write_text(config_to_json(cfg) + "\n")
    status = ["ok"] if not failures else ["diverged"] + failures
    (out_dir / "status.txt").write_text("\n".join(status) + "\n")
    return 0 if not failures else 3


def _cells(grid: dict):
    """Cartesian cells of one solver's grid, in lexicographic key order."""
    if not grid:
        return [{}]
    keys = sorted(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def sweep(cfg: ExperimentConfig, out_dir: Path) -> int:
    """Run every grid cell per solver (reduced trials) and mark the best cell."""
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = []
    for name in sorted(cfg.solvers):
        cells = _cells(cfg.sweep_grids()[name])
        if len(cells) > 1000:
            raise ConfigError(f"solver {name!r} grid has {len(cells)} cells (max 1000)")
        fixed = cfg.fixed_solver_params(name)
        for cell_id, cell in enumerate(cells):
            overrides = {**fixed, **cell}
            for trial in range(cfg.sweep_trials):
                jobs.append((name, cell_id, cell, overrides, trial))

    with ThreadPoolExecutor(max_workers=_pool_size()) as pool:
        futures = {
            (name, cell_id, trial): pool.submit(_run_one, cfg, name, overrides, trial)
            for name, cell_id, _, overrides, trial in jobs
        }
        results = {key: fut.result() for key, fut in futures.items()}

    lines = [SWEEP_HEADER]
    best = {}
    means = {}
    any_failure = False
    metric_names = {}
    for name, cell_id, cell, _, _ in jobs:
        if (name, cell_id) in means:
            continue
        vals = []
        metric = "diverged"
        for t in range(cfg.sweep_trials):
            report, failure = results[(name, cell_id, t)]
            if failure is not None:
                any_failure = True
                vals.append(np.inf)  # a diverged cell never wins
            else:
                vals.append(report.final_value)
                metric = report.metric_name
        means[(name, cell_id)] = (float(np.mean(vals)), cell)
        metric_names[(name, cell_id)] = metric
    for (name, cell_id), (mean, cell) in means.items():
        # argmin by final metric; ties break toward the lexicographically
        # earlier cell, which is the lower cell_id by construction
        if name not in best or mean < best[name][1]:
            best[name] = (cell_id, mean)
    for (name, cell_id), (mean, cell) in sorted(means.items()):
        params = ";".join(f"{k}={cell[k]}" for k in sorted(cell))
        flag = "yes" if best[name][0] == cell_id else "no"
        lines.append(f"{name},{cell_id},{params},{metric_names[(name, cell_id)]},"
                     f"{_fmt(mean)},{flag}")
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    return 0 if not any_failure else 3


def oracle_command(task_name: str, chain_file: str | None, out=sys.stdout) -> int:
    """Print exact solutions and residual certificates; exit 0 iff they pass."""
    from .gap import tabular_gap
    from .tasks import (
        ChainSpec,
        DiscreteToyTask,
        hitting_time_oracle,
        linear_bellman_oracle,
        load_chain,
        stationary_distribution,
        tabular_value,
    )

    def emit(text):
        print(text, file=out)

    if task_name == "hitting_time":
        chain = load_chain(chain_file) if chain_file else ChainSpec(
            np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(2))
        h, pi = hitting_time_oracle(chain)
        emit(f"h = {h.tolist()}")
        emit(f"pi = {pi.tolist()}")
        gap = np.max(np.abs(pi - stationary_distribution(chain.transition)))
        emit(f"stationary cross-check residual = {gap:.3e}")
        return 0 if gap <= 1e-10 else 3
    if task_name == "linear_bellman":
        chain = load_chain(chain_file) if chain_file else ChainSpec(
            np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]),
            np.zeros(3), boundary=(2,))
        z = linear_bellman_oracle(chain)
        interior = list(chain.interior)
        gain = np.exp(-chain.rewards[interior])
        residual = float(np.max(np.abs(
            z[interior] - gain * (chain.transition[interior] @ z))))
        emit(f"z = {z.tolist()}")
        emit(f"fixed-point residual = {residual:.3e}")
        return 0 if residual <= 1e-10 else 3
    if task_name == "tabular_value":
        chain = load_chain(chain_file) if chain_file else ChainSpec(
            np.array([[0.5, 0.5, 0.0], [0.2, 0.3, 0.5], [0.4, 0.1, 0.5]]),
            np.array([1.0, 0.0, 2.0]))
        v = tabular_value(chain, 0.9)
        residual = float(np.max(np.abs(
            v - (chain.rewards + 0.9 * chain.transition @ v))))
        emit(f"V = {v.tolist()}")
        emit(f"Bellman residual = {residual:.3e}")
        return 0 if residual <= 1e-12 else 3
    if task_name == "discrete_toy":
        task = DiscreteToyTask()
        w, objective, u = task.exact_optimum()
        primal, dual = task.exact_models()
        delta_f, _ = task.ball_radii()
        gap = tabular_gap(task, primal, dual, delta_f)
        emit(f"w* = {w.tolist()}")
        emit(f"objective* = {objective!r}")
        emit(f"u* = {u.tolist()}")
        emit(f"gap at optimum = {gap:.3e}")
        return 0 if abs(gap) <= 1e-8 else 3
    raise ConfigError(f"task {task_name!r} has no oracle "
                      "(known: hitting_time, linear_bellman, tabular_value, discrete_toy)")


def selfcheck(out=sys.stdout) -> int:
    """Fast invariant suite; one PASS/FAIL line per check."""
    from . import selfchecks

    failures = 0
    for name, fn in selfchecks.CHECKS:
        try:
            fn()
            print(f"PASS {name}", file=out)
        except Exception as err:  # noqa: BLE001 - report and continue
            failures += 1
            print(f"FAIL {name}: {err}", file=out)
    return 0 if failures == 0 else 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="condex",
        description="Experiment runner for conditional-distribution solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a config")
    p_run.add_argument("config")
    p_run.add_argument("--output", help="override experiment.output_dir")
    p_sweep = sub.add_parser("sweep", help="run a config's hyperparameter grids")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--output", help="override experiment.output_dir")
    p_oracle = sub.add_parser("oracle", help="print a task's exact solution")
    p_oracle.add_argument("task")
    p_oracle.add_argument("--chain", help="chain file to use instead of the demo chain")
    sub.add_parser("selfcheck", help="run the invariant suites")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        if args.command == "run":
            cfg = load_config(args.config)
            out_dir = Path(args.output or cfg.output_dir)
            return run_experiment(cfg, out_dir)
        if args.command == "sweep":
            cfg = load_config(args.config)
            out_dir = Path(args.output or cfg.output_dir)
            return sweep(cfg, out_dir)
        if args.command == "oracle":
            return oracle_command(args.task, args.chain)
        if args.command == "selfcheck":
            return selfcheck()
    except (ConfigError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (DivergenceError, NumericalError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 3
    return 2


if __name__ == "__main__":
    sys.exit(main())
