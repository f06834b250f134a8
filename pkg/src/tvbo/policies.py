"""UCB policies over a finite candidate set.

All four policies share one loop: pick the candidate maximizing
``mean + sqrt(beta_t) * std``, observe, then update the dataset. They differ
only in the posterior they use and in when they throw data away:

* ``GPUCB``   static posterior, never resets.
* ``TVGPUCB`` time-varying posterior with a fixed rate of change, never resets.
* ``RGPUCB``  static posterior, empties the dataset every ``N_const`` steps.
* ``ETGPUCB`` static posterior, resets to the triggering observation whenever
  the event trigger fires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Domain
from .kernels import Kernel, temporal_factors, temporal_gram
from .posterior import Dataset, NoiseModel, PosteriorQueryResult, condition
from .trigger import TriggerConfig, TriggerEvaluation, evaluate_trigger


@dataclass(frozen=True)
class BetaSchedule:
    """Exploration weight ``beta_t``.

    ``approximate``: ``c1 * ln(c2 * t)``. ``exact``: the high-probability
    schedule built from ``delta``, dimension ``d``, domain side ``r`` and the
    derivative tail constants ``a1``, ``b1``. Both are clamped at 0.
    """

    kind: str = "approximate"
    c1: float = 0.8
    c2: float = 4.0
    delta: float = 0.1
    d: int = 2
    r: float = 1.0
    a1: float = 1.0
    b1: float = 1.0

    def __post_init__(self):
        if self.kind not in ("approximate", "exact"):
            raise ValueError(f"unknown beta schedule {self.kind!r}")
        if self.kind == "approximate" and not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("c1 and c2 must be positive")
        if self.kind == "exact" and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    def __call__(self, t: int) -> float:
        return beta(self, t)


def beta(schedule: BetaSchedule, t: int) -> float:
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if schedule.kind == "approximate":
        value = schedule.c1 * math.log(schedule.c2 * t)
    else:
        s, pi2 = schedule, math.pi**2
        inner = math.log(5 * s.d * s.a1 * pi2 * t**2 / (3 * s.delta))
        value = 2 * math.log(5 * pi2 * t**2 / (3 * s.delta)) + 2 * s.d * math.log(
            t**2 * s.d * s.b1 * s.r * math.sqrt(max(inner, 0.0))
        )
    return max(value, 0.0)


def select_query(mean, std, beta_t: float) -> int:
    """Index of the largest UCB value; ties go to the lowest index."""
    ucb = np.asarray(mean) + math.sqrt(beta_t) * np.asarray(std)
    return int(np.argmax(ucb))


def reset_period(epsilon: float, horizon: int) -> int:
    """Periodic reset time ``ceil(min(T, 12 eps^(-1/4)))``."""
    if epsilon <= 0:
        return int(horizon)
    return int(math.ceil(min(horizon, 12.0 * epsilon**-0.25)))


_CANDIDATE_COV: dict = {}


def candidate_covariance(kernel: Kernel, domain: Domain) -> np.ndarray:
    key = (kernel, domain)
    K = _CANDIDATE_COV.get(key)
    if K is None:
        K = kernel(domain.candidates, domain.candidates)
        K.setflags(write=False)
        if len(_CANDIDATE_COV) > 4:
            _CANDIDATE_COV.clear()
        _CANDIDATE_COV[key] = K
    return K


@dataclass(frozen=True)
class StepInfo:
    reset: bool = False
    trigger: TriggerEvaluation | None = None


class UCBPolicy:
    kind = "gp_ucb"

    def __init__(
        self,
        domain: Domain,
        kernel: Kernel,
        noise: NoiseModel,
        beta_schedule: BetaSchedule,
        name: str | None = None,
    ):
        self.domain = domain
        self.kernel = kernel
        self.noise = noise
        self.beta_schedule = beta_schedule
        self.name = name or self.kind
        self.cov = candidate_covariance(kernel, domain)
        self.prior_var = np.diag(self.cov).copy()
        self.data = Dataset()
        self.reset_log: list[int] = []

    def _blocks(self, t: int, columns=slice(None)):
        idx = np.asarray(self.data.indices, dtype=np.int64)
        K_data = self.cov[np.ix_(idx, idx)]
        K_cross = self.cov[idx][:, columns]
        return K_data, K_cross

    def posterior(self, t: int, columns=slice(None)) -> PosteriorQueryResult:
        """Posterior over candidates (all, or ``columns``) before step ``t``'s query."""
        K_data, K_cross = self._blocks(t, columns)
        return condition(K_data, K_cross, self.prior_var[columns], self.data.y, self.noise.sigma_n_sq)

    def ucb(self, t: int) -> np.ndarray:
        post = self.posterior(t)
        return post.mean + math.sqrt(self.beta_schedule(t)) * np.sqrt(post.variance)

    def select(self, t: int) -> int:
        post = self.posterior(t)
        return select_query(post.mean, np.sqrt(post.variance), self.beta_schedule(t))

    def _append(self, t: int, index: int, y: float):
        self.data.append(self.domain.candidates[index], y, t, index=int(index))

    def update(self, t: int, index: int, y: float) -> StepInfo:
        self._append(t, index, y)
        return StepInfo()


class GPUCB(UCBPolicy):
    kind = "gp_ucb"


class TVGPUCB(UCBPolicy):
    kind = "tv_gp_ucb"

    def __init__(self, *args, epsilon: float, **kwargs):
        super().__init__(*args, **kwargs)
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
        self.epsilon = float(epsilon)

    def _blocks(self, t: int, columns=slice(None)):
        K_data, K_cross = super()._blocks(t, columns)
        times = self.data.t_abs
        K_data = K_data * temporal_gram(self.epsilon, times)
        K_cross = K_cross * temporal_factors(self.epsilon, t - times)[:, None]
        return K_data, K_cross


class RGPUCB(UCBPolicy):
    kind = "r_gp_ucb"

    def __init__(self, *args, period: int, **kwargs):
        super().__init__(*args, **kwargs)
        if period < 1:
            raise ValueError("reset period must be >= 1")
        self.period = int(period)

    def update(self, t: int, index: int, y: float) -> StepInfo:
        self._append(t, index, y)
        if t % self.period == 0:
            self.data.reset(t)
            self.reset_log.append(t)
            return StepInfo(reset=True)
        return StepInfo()


class ETGPUCB(UCBPolicy):
    kind = "et_gp_ucb"

    def __init__(self, *args, delta_B: float = 0.1, **kwargs):
        super().__init__(*args, **kwargs)
        self.trigger = TriggerConfig(delta_B=delta_B, sigma_n_sq=self.noise.sigma_n_sq)

    def update(self, t: int, index: int, y: float) -> StepInfo:
        post = self.posterior(t, columns=[int(index)])
        at_xt = PosteriorQueryResult(float(post.mean[0]), float(post.variance[0]))
        ev = evaluate_trigger(self.trigger, at_xt, y, t_prime=len(self.data) + 1)
        if ev.fired:
            # the triggering pair starts the new dataset
            self.data.reset(t)
            self.reset_log.append(t)
        self._append(t, index, y)
        return StepInfo(reset=ev.fired, trigger=ev)


POLICIES = {cls.kind: cls for cls in (GPUCB, TVGPUCB, RGPUCB, ETGPUCB)}
