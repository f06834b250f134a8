"""Event-triggered and baseline GP-UCB for time-varying Bayesian optimization."""

from .domain import Domain
from .kernels import EmpiricalKernel, SquaredExponentialKernel, eval_kernel, gram_matrix, temporal_gram
from .policies import ETGPUCB, GPUCB, RGPUCB, TVGPUCB, BetaSchedule, beta, reset_period, select_query
from .posterior import Dataset, NoiseModel, PosteriorQueryResult, posterior_static, posterior_timevarying, sample_gp_on_grid
from .trigger import TriggerConfig, TriggerEvaluation, evaluate_trigger, noise_bound, pi_t, rho_t

__version__ = "0.1.0"
