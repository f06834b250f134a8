"""Exact GP posterior inference, static and time-varying, via Cholesky.

The static posterior conditions on all observations as if they were taken
from one fixed function. The time-varying posterior down-weights the
covariance between observations taken at different steps by
``(1 - epsilon) ** (|i - j| / 2)`` (Hadamard product with the spatial Gram),
which is the exact posterior under the Markov-chain objective model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .kernels import Kernel, gram_matrix, temporal_factors, temporal_gram

JITTER_SCHEDULE = tuple(10.0**e for e in range(-10, -3))


class CholeskyError(np.linalg.LinAlgError):
    """Factorization failed even after the largest jitter was added."""


def jittered_cholesky(A: np.ndarray, try_exact: bool = False) -> np.ndarray:
    """Lower Cholesky factor of ``A + jitter * I`` for the first jitter that works.

    With ``try_exact`` the unperturbed matrix is tried first; noisy posteriors
    use this since ``sigma_n^2 I`` already makes the system positive definite.
    """
    eye = np.eye(len(A))
    for jitter in ((0.0,) if try_exact else ()) + JITTER_SCHEDULE:
        try:
            return np.linalg.cholesky(A + jitter * eye)
        except np.linalg.LinAlgError:
            continue
    raise CholeskyError(
        f"Cholesky failed for a {A.shape[0]}x{A.shape[0]} matrix up to jitter {JITTER_SCHEDULE[-1]:g}"
    )


@dataclass(frozen=True)
class NoiseModel:
    sigma_n_sq: float

    def __post_init__(self):
        if not self.sigma_n_sq > 0:
            raise ValueError(f"noise variance must be positive, got {self.sigma_n_sq}")


class PosteriorQueryResult(NamedTuple):
    mean: float | np.ndarray
    variance: float | np.ndarray

    @property
    def std(self):
        return np.sqrt(self.variance)


@dataclass
class Dataset:
    """Observations collected since the most recent reset.

    ``times`` holds absolute time steps (strictly increasing); ``indices``
    holds candidate indices when the query came from a finite candidate set.
    """

    points: list = field(default_factory=list)
    values: list = field(default_factory=list)
    times: list = field(default_factory=list)
    indices: list = field(default_factory=list)
    reset_time: int = 0

    def __len__(self):
        return len(self.values)

    def append(self, x, y: float, t_abs: int, index: int | None = None) -> None:
        if self.times and t_abs <= self.times[-1]:
            raise ValueError(f"time stamps must increase: {t_abs} after {self.times[-1]}")
        self.points.append(np.atleast_1d(np.asarray(x, dtype=float)))
        self.values.append(float(y))
        self.times.append(int(t_abs))
        self.indices.append(index)

    def reset(self, t_abs: int) -> None:
        self.points.clear()
        self.values.clear()
        self.times.clear()
        self.indices.clear()
        self.reset_time = int(t_abs)

    @property
    def X(self) -> np.ndarray:
        return np.vstack(self.points)

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def t_abs(self) -> np.ndarray:
        return np.asarray(self.times, dtype=np.int64)

    @property
    def reset_clock(self) -> int:
        """Clock position of the newest entry; equals ``len(self)``."""
        return len(self)


def condition(K_data, K_cross, prior_var, y, sigma_n_sq) -> PosteriorQueryResult:
    """Posterior mean and variance from precomputed covariance blocks.

    ``K_data`` is the (n, n) covariance among observations, ``K_cross`` the
    (n, m) covariance between observations and query points, ``prior_var``
    the (m,) prior variance at the queries.
    """
    prior_var = np.asarray(prior_var, dtype=float)
    n = len(y)
    if n == 0:
        return PosteriorQueryResult(np.zeros_like(prior_var), prior_var.copy())
    L = jittered_cholesky(K_data + sigma_n_sq * np.eye(n), try_exact=True)
    V = solve_triangular(L, K_cross, lower=True, check_finite=False)
    alpha = solve_triangular(L, y, lower=True, check_finite=False)
    mean = V.T @ alpha
    var = prior_var - np.einsum("ij,ij->j", V, V)
    np.maximum(var, 0.0, out=var)
    return PosteriorQueryResult(mean, var)


def _queries(x):
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1:
        return x.reshape(1, -1), True
    return x, False


def _unwrap(res: PosteriorQueryResult, single: bool) -> PosteriorQueryResult:
    if single:
        return PosteriorQueryResult(float(res.mean[0]), float(res.variance[0]))
    return res


def posterior_static(kernel: Kernel, data: Dataset, noise: NoiseModel, x) -> PosteriorQueryResult:
    """Standard GP posterior at ``x`` (one point, or an (m, d) batch)."""
    Xq, single = _queries(x)
    prior = kernel.diag(Xq)
    if len(data) == 0:
        return _unwrap(PosteriorQueryResult(np.zeros_like(prior), prior), single)
    X = data.X
    res = condition(gram_matrix(kernel, X), kernel(X, Xq), prior, data.y, noise.sigma_n_sq)
    return _unwrap(res, single)


def posterior_timevarying(
    kernel: Kernel, data: Dataset, noise: NoiseModel, epsilon: float, x, t_query: int
) -> PosteriorQueryResult:
    """Posterior of ``f_{t_query}`` under the Markov-chain model with rate ``epsilon``."""
    Xq, single = _queries(x)
    prior = kernel.diag(Xq)
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if len(data) == 0:
        return _unwrap(PosteriorQueryResult(np.zeros_like(prior), prior), single)
    X, t = data.X, data.t_abs
    K = gram_matrix(kernel, X) * temporal_gram(epsilon, t)
    k_cross = kernel(X, Xq) * temporal_factors(epsilon, t_query - t)[:, None]
    return _unwrap(condition(K, k_cross, prior, data.y, noise.sigma_n_sq), single)


_GRID_FACTORS: dict = {}


def grid_cholesky(kernel: Kernel, grid: np.ndarray) -> np.ndarray:
    """Cached jittered Cholesky factor of the Gram matrix over ``grid``."""
    grid = np.ascontiguousarray(grid, dtype=float)
    key = (kernel, grid.shape, grid.tobytes())
    L = _GRID_FACTORS.get(key)
    if L is None:
        L = jittered_cholesky(gram_matrix(kernel, grid))
        L.setflags(write=False)
        if len(_GRID_FACTORS) > 4:
            _GRID_FACTORS.clear()
        _GRID_FACTORS[key] = L
    return L


def sample_gp_on_grid(kernel: Kernel, grid, rng_seed) -> np.ndarray:
    """One draw from N(0, K_grid); ``rng_seed`` is an int or a numpy Generator."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    if grid.ndim == 1:
        grid = grid[:, None]
    L = grid_cholesky(kernel, grid)
    rng = np.random.default_rng(rng_seed)
    return L @ rng.standard_normal(len(grid))
