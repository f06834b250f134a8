"""Event trigger that decides when a dataset has gone stale.

The test value is the absolute deviation of a new observation from the
posterior mean at the queried point. The threshold is a uniform error bound
that holds for all steps since the last reset with probability at least
``1 - delta_B`` when the objective does not change:

    kappa = sqrt(rho) * sigma(x_t) + w_bar
    rho   = 2 ln(2 pi_t' / delta_B)
    w_bar = sqrt(2 sigma_n^2 ln(2 pi_t' / delta_B))
    pi_t' = pi^2 t'^2 / 6

``t'`` is the reset clock, the position of the incoming observation counted
from the most recent reset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .posterior import PosteriorQueryResult


@dataclass(frozen=True)
class TriggerConfig:
    delta_B: float = 0.1
    sigma_n_sq: float = 0.02

    def __post_init__(self):
        if not 0.0 < self.delta_B < 1.0:
            raise ValueError(f"delta_B must lie in (0, 1), got {self.delta_B}")
        if not self.sigma_n_sq > 0:
            raise ValueError("sigma_n_sq must be positive")


@dataclass(frozen=True)
class TriggerEvaluation:
    psi: float
    kappa: float
    fired: bool
    t_prime: int


def _check_clock(t_prime):
    if t_prime < 1:
        raise ValueError(f"reset clock must be >= 1, got {t_prime}")


def pi_t(t_prime: int) -> float:
    _check_clock(t_prime)
    return math.pi**2 * t_prime**2 / 6.0


def rho_t(t_prime: int, delta_B: float) -> float:
    if not 0.0 < delta_B < 1.0:
        raise ValueError(f"delta_B must lie in (0, 1), got {delta_B}")
    return 2.0 * math.log(2.0 * pi_t(t_prime) / delta_B)


def noise_bound(t_prime: int, delta_B: float, sigma_n_sq: float) -> float:
    if sigma_n_sq < 0:
        raise ValueError("sigma_n_sq must be non-negative")
    return math.sqrt(sigma_n_sq * rho_t(t_prime, delta_B))


def threshold(config: TriggerConfig, variance: float, t_prime: int) -> float:
    return math.sqrt(rho_t(t_prime, config.delta_B) * max(variance, 0.0)) + noise_bound(
        t_prime, config.delta_B, config.sigma_n_sq
    )


def evaluate_trigger(
    config: TriggerConfig, posterior_at_xt: PosteriorQueryResult, y_t: float, t_prime: int
) -> TriggerEvaluation:
    """Compare ``y_t`` against the static posterior at the just-queried point.

    ``posterior_at_xt`` must come from the dataset *before* ``y_t`` is added,
    and ``t_prime = len(dataset) + 1``.
    """
    psi = abs(float(y_t) - float(posterior_at_xt.mean))
    kappa = threshold(config, float(posterior_at_xt.variance), t_prime)
    return TriggerEvaluation(psi=psi, kappa=kappa, fired=psi > kappa, t_prime=t_prime)
