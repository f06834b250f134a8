"""Seeded experiment execution.

Every (policy, seed) run sees the same objective realization and the same
observation-noise sequence for a given seed, so policies are compared on
common random numbers. Seeds are independent tasks; with ``jobs > 1`` they
go to a process pool and results are re-sorted, so output never depends on
scheduling. BLAS is pinned to one thread inside every task for the same
reason.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from threadpoolctl import threadpool_limits

from ..domain import Domain
from ..kernels import EmpiricalKernel, SquaredExponentialKernel
from ..policies import POLICIES, BetaSchedule, UCBPolicy
from ..posterior import NoiseModel
from ..synthetic import (
    EpsilonSchedule,
    MarkovChainObjective,
    ReplayObjective,
    SuddenChangeObjective,
    observe,
    seed_streams,
)
from .config import ExperimentConfig, PolicyConfig
from .ingest import ArmsReplayDataset, ingest_arms_csv

log = logging.getLogger(__name__)


@dataclass
class RegretTrace:
    policy: str
    seed: int
    x_index: np.ndarray
    y: np.ndarray
    f_xt: np.ndarray
    f_star: np.ndarray
    reset: np.ndarray
    psi: np.ndarray
    kappa: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.y)

    @property
    def r(self) -> np.ndarray:
        return self.f_star - self.f_xt

    @property
    def R(self) -> np.ndarray:
        return np.cumsum(self.r)

    @property
    def R_T(self) -> float:
        return float(self.R[-1])

    @property
    def n_resets(self) -> int:
        return int(self.reset.sum())

    @property
    def reset_times(self) -> list[int]:
        return [int(t) + 1 for t in np.flatnonzero(self.reset)]


@dataclass(frozen=True)
class Problem:
    domain: Domain
    kernel: SquaredExponentialKernel | EmpiricalKernel
    noise: NoiseModel
    beta: BetaSchedule
    replay: ArmsReplayDataset | None = None


@lru_cache(maxsize=4)
def _replay(path: str, train_days: tuple, test_days: tuple, steps_per_day: int) -> ArmsReplayDataset:
    return ingest_arms_csv(path, train_days, test_days, steps_per_day)


def build_problem(config: ExperimentConfig) -> Problem:
    replay = None
    obj = config.objective
    if obj.kind == "arms-replay":
        replay = _replay(obj.path, tuple(obj.train_days), tuple(obj.test_days), obj.steps_per_day)
        if config.horizon > len(replay.test):
            raise ValueError(f"horizon {config.horizon} exceeds {len(replay.test)} test steps")

    if config.domain.kind == "grid":
        dom = Domain.grid(config.domain.bounds, config.domain.resolution)
        ls = config.kernel.lengthscales
        ls = tuple(ls) if isinstance(ls, list) else (ls,) * dom.dim
        kernel = SquaredExponentialKernel(ls, config.kernel.signal_variance)
    else:
        if config.kernel.path is not None:
            kernel = EmpiricalKernel.from_csv(config.kernel.path)
        else:
            kernel = replay.kernel()
        if replay is not None and kernel.n_arms != replay.n_arms:
            raise ValueError(f"kernel has {kernel.n_arms} arms, data has {replay.n_arms}")
        dom = Domain.arms(kernel.n_arms)

    b = config.beta
    beta = BetaSchedule(kind=b.kind, c1=b.c1, c2=b.c2, delta=b.delta, d=dom.dim, r=b.r, a1=b.a1, b1=b.b1)
    return Problem(dom, kernel, NoiseModel(config.noise_var), beta, replay)


def make_objective(config: ExperimentConfig, problem: Problem, rng):
    obj = config.objective
    grid = problem.domain.candidates
    if obj.kind == "markov":
        return MarkovChainObjective(problem.kernel, grid, EpsilonSchedule(obj.epsilon), rng)
    if obj.kind == "sudden":
        return SuddenChangeObjective(problem.kernel, grid, obj.change_step, rng)
    return ReplayObjective(problem.replay.test)


def make_policy(spec: PolicyConfig, problem: Problem, horizon: int) -> UCBPolicy:
    cls = POLICIES[spec.kind]
    args = (problem.domain, problem.kernel, problem.noise, problem.beta)
    if spec.kind == "tv_gp_ucb":
        return cls(*args, name=spec.label, epsilon=spec.epsilon)
    if spec.kind == "r_gp_ucb":
        return cls(*args, name=spec.label, period=spec.period(horizon))
    if spec.kind == "et_gp_ucb":
        return cls(*args, name=spec.label, delta_B=spec.delta_B)
    return cls(*args, name=spec.label)


def objective_path(config: ExperimentConfig, problem: Problem, seed: int) -> np.ndarray:
    """(T, n_candidates) array of objective values f_1..f_T for one seed."""
    obj_rng, _ = seed_streams(seed)
    objective = make_objective(config, problem, obj_rng)
    F = np.empty((config.horizon, len(problem.domain)))
    F[0] = objective.values
    for t in range(2, config.horizon + 1):
        F[t - 1] = objective.advance(t).values
    return F


def run_policy(policy: UCBPolicy, F: np.ndarray, noise_rng, noise_var: float, seed: int) -> RegretTrace:
    T = len(F)
    x = np.empty(T, dtype=np.int64)
    y, f_xt, f_star = np.empty(T), np.empty(T), np.empty(T)
    reset = np.zeros(T, dtype=bool)
    psi, kappa = np.full(T, np.nan), np.full(T, np.nan)
    for t in range(1, T + 1):
        values = F[t - 1]
        i = policy.select(t)
        yt = values[i] + (np.sqrt(noise_var) * noise_rng.standard_normal() if noise_var > 0 else 0.0)
        info = policy.update(t, i, yt)
        x[t - 1], y[t - 1] = i, yt
        f_xt[t - 1], f_star[t - 1] = values[i], values.max()
        reset[t - 1] = info.reset
        if info.trigger is not None:
            psi[t - 1], kappa[t - 1] = info.trigger.psi, info.trigger.kappa
    return RegretTrace(policy.name, seed, x, y, f_xt, f_star, reset, psi, kappa)


def run_seed(config: ExperimentConfig, seed: int, only: tuple[str, ...] | None = None) -> list[RegretTrace]:
    with threadpool_limits(limits=1):
        problem = build_problem(config)
        F = objective_path(config, problem, seed)
        noise_var = config.noise_var if config.objective.add_noise else 0.0
        traces = []
        for spec in config.policies:
            if only is not None and spec.label not in only:
                continue
            _, noise_rng = seed_streams(seed)
            policy = make_policy(spec, problem, config.horizon)
            traces.append(run_policy(policy, F, noise_rng, noise_var, seed))
        return traces


def _sort(traces: list[RegretTrace]) -> list[RegretTrace]:
    return sorted(traces, key=lambda tr: (tr.policy, tr.seed))


def run_experiment(config: ExperimentConfig, jobs: int = 1, only=None) -> list[RegretTrace]:
    """Run every (policy, seed) pair; results sorted by (policy, seed)."""
    only = tuple(only) if only is not None else None
    if only is not None:
        unknown = set(only) - {p.label for p in config.policies}
        if unknown:
            raise KeyError(f"unknown policies {sorted(unknown)}")
    if jobs <= 1 or len(config.seeds) == 1:
        out = []
        for seed in config.seeds:
            out.extend(run_seed(config, seed, only))
            log.debug("seed %d done", seed)
        return _sort(out)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        chunks = pool.map(run_seed, [config] * len(config.seeds), config.seeds, [only] * len(config.seeds))
        return _sort([tr for chunk in chunks for tr in chunk])
