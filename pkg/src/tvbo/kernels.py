"""Covariance functions over the search domain and temporal forgetting factors.

Two spatial kernels are provided:

* :class:`SquaredExponentialKernel` with one lengthscale per input dimension,
  ``k(x, x') = s * exp(-0.5 * sum_d ((x_d - x'_d) / l_d) ** 2)``.
* :class:`EmpiricalKernel`, a fixed covariance matrix over a discrete set of
  arms, evaluated at integer arm indices.

Both are immutable and evaluate on 2-D arrays of shape ``(n_points, dim)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EIGEN_TOL = 1e-10


@dataclass(frozen=True)
class SquaredExponentialKernel:
    lengthscales: tuple[float, ...]
    signal_variance: float = 1.0

    def __post_init__(self):
        ls = tuple(float(v) for v in np.atleast_1d(self.lengthscales))
        if not ls or any(not v > 0 for v in ls):
            raise ValueError(f"lengthscales must be positive, got {ls}")
        if not self.signal_variance > 0:
            raise ValueError("signal_variance must be positive")
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "signal_variance", float(self.signal_variance))

    @property
    def dim(self) -> int:
        return len(self.lengthscales)

    def _check(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {X.shape[1]}")
        return X

    def __call__(self, X, Y) -> np.ndarray:
        X, Y = self._check(X), self._check(Y)
        # per-dimension differences keep k(x, x) and symmetry exact
        sq = np.zeros((len(X), len(Y)))
        for d, ell in enumerate(self.lengthscales):
            diff = (X[:, d, None] - Y[None, :, d]) / ell
            sq += diff * diff
        return self.signal_variance * np.exp(-0.5 * sq)

    def diag(self, X) -> np.ndarray:
        return np.full(len(self._check(X)), self.signal_variance)


@dataclass(frozen=True, eq=False)
class EmpiricalKernel:
    """Covariance matrix over ``n_arms`` discrete arms.

    The input matrix is symmetrized and its negative eigenvalues (down to
    ``-EIGEN_TOL``) are clamped to zero. Eigenvalues below ``-EIGEN_TOL``
    mean the matrix is not a covariance and raise ``ValueError``.
    """

    covariance_matrix: np.ndarray
    _key: bytes = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.covariance_matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ValueError(f"covariance matrix must be square and non-empty, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("covariance matrix contains non-finite entries")
        A = 0.5 * (A + A.T)
        w, V = np.linalg.eigh(A)
        if w.min() < -EIGEN_TOL * max(1.0, abs(w).max()):
            raise ValueError(f"covariance matrix is not PSD (min eigenvalue {w.min():.3g})")
        if w.min() < 0:
            A = (V * np.maximum(w, 0.0)) @ V.T
            A = 0.5 * (A + A.T)
        A.setflags(write=False)
        object.__setattr__(self, "covariance_matrix", A)
        object.__setattr__(self, "_key", A.tobytes())

    @classmethod
    def from_csv(cls, path) -> "EmpiricalKernel":
        """Load a header-free, comma-separated ``n_arms x n_arms`` matrix."""
        return cls(np.loadtxt(Path(path), delimiter=",", ndmin=2))

    @property
    def n_arms(self) -> int:
        return self.covariance_matrix.shape[0]

    @property
    def dim(self) -> int:
        return 1

    def _index(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1)
        idx = X.astype(np.int64)
        if np.any(idx != X):
            raise ValueError("empirical kernel is only defined at integer arm indices")
        if np.any((idx < 0) | (idx >= self.n_arms)):
            raise IndexError(f"arm index out of range [0, {self.n_arms})")
        return idx

    def __call__(self, X, Y) -> np.ndarray:
        return self.covariance_matrix[np.ix_(self._index(X), self._index(Y))]

    def diag(self, X) -> np.ndarray:
        return np.diag(self.covariance_matrix)[self._index(X)]

    def __eq__(self, other):
        return isinstance(other, EmpiricalKernel) and self._key == other._key

    def __hash__(self):
        return hash(self._key)


Kernel = SquaredExponentialKernel | EmpiricalKernel


def eval_kernel(kernel: Kernel, x, x_prime) -> float:
    """k(x, x') for two single points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=float))
    if x.shape != x_prime.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x_prime.shape}")
    return float(kernel(x[None, :], x_prime[None, :])[0, 0])


def gram_matrix(kernel: Kernel, points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise ValueError("gram_matrix needs at least one point")
    if points.ndim == 1:
        points = points[:, None]
    return kernel(points, points)


def temporal_gram(epsilon: float, time_indices) -> np.ndarray:
    """Matrix of ``(1 - epsilon) ** (|i - j| / 2)`` over the given time steps."""
    t = np.asarray(time_indices, dtype=float).reshape(-1)
    return temporal_factors(epsilon, t[:, None] - t[None, :])


def temporal_factors(epsilon: float, lags) -> np.ndarray:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    lags = np.abs(np.asarray(lags, dtype=float))
    if epsilon == 1.0:
        return (lags == 0).astype(float)
    return np.power(1.0 - epsilon, lags / 2.0)
