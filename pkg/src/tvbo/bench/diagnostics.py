"""Stopping-time Monte Carlo and the regret-bound evaluator."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from ..policies import ETGPUCB, BetaSchedule
from ..synthetic import seed_streams
from .config import ExperimentConfig
from .runner import RegretTrace, build_problem, make_objective, make_policy


def first_reset_time(config: ExperimentConfig, seed: int) -> int:
    """Step of the first trigger firing, or ``horizon + 1`` if it never fires."""
    spec = next((p for p in config.policies if p.kind == "et_gp_ucb"), None)
    if spec is None:
        raise ValueError("stopping times need an et_gp_ucb policy in the config")
    with threadpool_limits(limits=1):
        problem = build_problem(config)
        obj_rng, noise_rng = seed_streams(seed)
        objective = make_objective(config, problem, obj_rng)
        policy: ETGPUCB = make_policy(spec, problem, config.horizon)
        sd = math.sqrt(config.noise_var) if config.objective.add_noise else 0.0
        for t in range(1, config.horizon + 1):
            if t > 1:
                objective.advance(t)
            i = policy.select(t)
            y = objective.values[i] + sd * noise_rng.standard_normal()
            if policy.update(t, i, y).reset:
                return t
    return config.horizon + 1


@dataclass
class StoppingTimes:
    epsilon: float
    horizon: int
    seeds: list[int]
    taus: np.ndarray  # horizon + 1 marks "no reset within the horizon"
    quantile_delta: float = 0.2

    @property
    def censored(self) -> np.ndarray:
        return self.taus > self.horizon

    @property
    def mean(self) -> float:
        return float(self.taus.mean())

    @property
    def median(self) -> float:
        return float(np.median(self.taus))

    @property
    def tau_bar(self) -> float:
        return self.mean / self.quantile_delta

    @property
    def fraction_below_tau_bar(self) -> float:
        return float(np.mean(self.taus < self.tau_bar))

    def quantile_check(self, slack: float = 0.03) -> bool:
        return self.fraction_below_tau_bar >= 1.0 - self.quantile_delta - slack

    def histogram(self) -> list[tuple[str, int]]:
        counts = np.bincount(self.taus, minlength=self.horizon + 2)
        rows = [(str(t), int(counts[t])) for t in range(1, self.horizon + 1)]
        rows.append((f">{self.horizon}", int(counts[self.horizon + 1])))
        return rows


def stopping_time_histogram(config: ExperimentConfig, n_runs: int | None = None, jobs: int = 1) -> StoppingTimes:
    """First-reset times of ET-GP-UCB over ``n_runs`` seeds (``0..n_runs-1``)."""
    if config.objective.kind != "markov":
        raise ValueError("stopping-time Monte Carlo needs a markov objective")
    seeds = list(range(n_runs)) if n_runs is not None else list(config.seeds)
    if jobs <= 1:
        taus = [first_reset_time(config, s) for s in seeds]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            taus = list(pool.map(first_reset_time, [config] * len(seeds), seeds, chunksize=16))
    return StoppingTimes(
        epsilon=config.objective.max_epsilon,
        horizon=config.horizon,
        seeds=seeds,
        taus=np.asarray(taus, dtype=np.int64),
        quantile_delta=config.bound.quantile_delta,
    )


# -- regret bound -----------------------------------------------------------


@dataclass(frozen=True)
class BoundConstants:
    sigma_n_sq: float
    tau_bar: float
    delta: float = 0.1
    a0: float = 1.0
    b0: float = 1.0
    a1: float = 1.0
    b1: float = 1.0
    L: float = 1.0
    L_f: float = 1.0
    gamma: float | None = None

    def __post_init__(self):
        if not self.sigma_n_sq > 0 or not self.tau_bar > 0:
            raise ValueError("sigma_n_sq and tau_bar must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def C1(self) -> float:
        return 72.0 / math.log(1.0 + 1.0 / self.sigma_n_sq)


def phi(T: int, epsilon: float, c: BoundConstants, beta_T: float) -> float:
    """Model-mismatch term; zero when ``epsilon`` is zero."""
    if epsilon == 0:
        return 0.0
    s2 = 1.0 / c.sigma_n_sq
    s4 = s2 * s2
    tau3 = c.tau_bar**3
    w_bar = math.sqrt(2.0 * c.sigma_n_sq * math.log(5 * math.pi**2 * c.tau_bar**2 / (6 * c.delta)))
    y_bar = c.b0 * math.sqrt(math.log(5 * c.a0 * math.pi**2 * T**2 / (2 * c.delta))) + w_bar
    return 3.0 * math.sqrt(beta_T * (3 * s2 + s4) * tau3 * epsilon) + (s2 + s4) * tau3 * epsilon * y_bar


def regret_bound(T: int, epsilon: float, c: BoundConstants, beta_T: float, gamma: float) -> float:
    main = math.sqrt(c.C1 * T * beta_T * (T / c.tau_bar + 1.0) * gamma)
    return main + 2.0 + T * phi(T, epsilon, c, beta_T)


def information_gain(kernel, points, sigma_n_sq: float) -> float:
    """0.5 * log det(I + K / sigma_n^2) for the given points."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return 0.0
    K = kernel(points, points)
    _, logdet = np.linalg.slogdet(np.eye(len(K)) + K / sigma_n_sq)
    return 0.5 * float(logdet)


def largest_block(trace: RegretTrace) -> np.ndarray:
    """Query indices of the longest stretch between resets (triggering pair opens a block)."""
    starts = [0] + [t - 1 for t in trace.reset_times if t > 1]
    ends = starts[1:] + [trace.horizon]
    lo, hi = max(zip(starts, ends), key=lambda se: (se[1] - se[0], -se[0]))
    return trace.x_index[lo:hi]


def gamma_surrogate(config: ExperimentConfig, trace: RegretTrace, tau_bar: float) -> float:
    """Realized information gain of the largest block, capped at ``floor(tau_bar)`` points.

    A lower surrogate for the maximum information gain over that many points.
    """
    problem = build_problem(config)
    block = largest_block(trace)[: max(1, int(math.floor(tau_bar)))]
    return information_gain(problem.kernel, problem.domain.candidates[block], config.noise_var)


@dataclass
class BoundRow:
    t: int
    beta_t: float
    phi_t: float
    gamma_surrogate_lower: float
    bound: float
    R_t: float


def evaluate_bound(config: ExperimentConfig, constants: BoundConstants, trace: RegretTrace) -> list[BoundRow]:
    """Right-hand side of the ET-GP-UCB regret bound at every step of ``trace``."""
    problem = build_problem(config)
    beta: BetaSchedule = problem.beta
    gamma = constants.gamma if constants.gamma is not None else gamma_surrogate(config, trace, constants.tau_bar)
    eps = config.objective.max_epsilon
    R = trace.R
    rows = []
    for t in range(1, trace.horizon + 1):
        b = beta(t)
        rows.append(BoundRow(t, b, phi(t, eps, constants, b), gamma, regret_bound(t, eps, constants, b, gamma), float(R[t - 1])))
    return rows
