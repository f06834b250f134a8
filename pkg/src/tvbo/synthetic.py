"""Objective generators on a fixed evaluation grid, and the noisy observation channel.

``MarkovChainObjective`` evolves as

    f_1 = g_1,    f_t = sqrt(1 - eps_t) f_{t-1} + sqrt(eps_t) g_t

with i.i.d. GP draws ``g_t``, so every ``f_t`` keeps the prior marginal law
N(0, k(x, x)). ``eps_t`` is constant or piecewise constant in ``t``.
"""

from __future__ import annotations

import bisect

import numpy as np

from .kernels import Kernel
from .posterior import grid_cholesky

DRAW_CHUNK = 16


def seed_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (objective, observation-noise) generators for one run seed."""
    obj, noise = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.default_rng(obj), np.random.default_rng(noise)


class EpsilonSchedule:
    """Piecewise-constant rate of change given as ``[(start_step, eps), ...]``."""

    def __init__(self, spec):
        if np.ndim(spec) == 0:
            spec = [(1, float(spec))]
        pieces = sorted((int(s), float(e)) for s, e in spec)
        if not pieces or pieces[0][0] > 1:
            raise ValueError("epsilon schedule must start at step 1")
        for _, e in pieces:
            if not 0.0 <= e <= 1.0:
                raise ValueError(f"epsilon must lie in [0, 1], got {e}")
        self._starts = [s for s, _ in pieces]
        self._values = [e for _, e in pieces]

    def __call__(self, t: int) -> float:
        return self._values[bisect.bisect_right(self._starts, t) - 1]


class _GridObjective:
    t: int
    values: np.ndarray

    def __init__(self, grid):
        grid = np.asarray(grid, dtype=float)
        self.grid = grid[:, None] if grid.ndim == 1 else grid

    def _step(self, t: int):
        if t != self.t + 1:
            raise ValueError(f"objective is at step {self.t}; cannot advance to {t}")
        self.t = t

    def index_of(self, x) -> int:
        """Nearest grid point to ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return int(np.argmin(((self.grid - x[None, :]) ** 2).sum(1)))


class MarkovChainObjective(_GridObjective):
    def __init__(self, kernel: Kernel, grid, epsilon, rng):
        super().__init__(grid)
        self.kernel = kernel
        self.epsilon = epsilon if isinstance(epsilon, EpsilonSchedule) else EpsilonSchedule(epsilon)
        self.rng = np.random.default_rng(rng)
        self._L = grid_cholesky(kernel, self.grid)
        self._buffer: list[np.ndarray] = []
        self.t = 1
        self.values = self._draw()

    def _draw(self) -> np.ndarray:
        if not self._buffer:
            Z = self.rng.standard_normal((DRAW_CHUNK, len(self.grid)))
            self._buffer = list(Z @ self._L.T)[::-1]
        return self._buffer.pop()

    def advance(self, t: int) -> "MarkovChainObjective":
        self._step(t)
        eps = self.epsilon(t)
        if eps == 1.0:
            self.values = self._draw()
        elif eps > 0.0:
            self.values = np.sqrt(1.0 - eps) * self.values + np.sqrt(eps) * self._draw()
        return self


class SuddenChangeObjective(_GridObjective):
    """Two independent GP draws; the second takes over at ``change_step``."""

    def __init__(self, kernel: Kernel, grid, change_step: int, rng):
        super().__init__(grid)
        rng = np.random.default_rng(rng)
        L = grid_cholesky(kernel, self.grid)
        Z = rng.standard_normal((2, len(self.grid)))
        self.f_A, self.f_B = Z @ L.T
        self.change_step = int(change_step)
        self.t = 1
        self.values = self.f_B if self.change_step <= 1 else self.f_A

    def advance(self, t: int) -> "SuddenChangeObjective":
        self._step(t)
        self.values = self.f_B if t >= self.change_step else self.f_A
        return self


class ReplayObjective(_GridObjective):
    """Replays recorded values: row ``t - 1`` of ``matrix`` is ``f_t`` over the arms."""

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=float)
        super().__init__(np.arange(matrix.shape[1], dtype=float))
        self.matrix = matrix
        self.t = 1
        self.values = matrix[0]

    def advance(self, t: int) -> "ReplayObjective":
        self._step(t)
        if t > len(self.matrix):
            raise IndexError(f"replay data has only {len(self.matrix)} steps")
        self.values = self.matrix[t - 1]
        return self


def advance(objective, t: int):
    return objective.advance(t)


def observe(objective, x, sigma_n_sq: float, rng: np.random.Generator) -> float:
    """``f_t(x) + w`` with ``w ~ N(0, sigma_n_sq)``; ``x`` is a grid index or a point."""
    idx = x if isinstance(x, (int, np.integer)) else objective.index_of(x)
    f = float(objective.values[idx])
    if sigma_n_sq == 0:
        return f
    return f + float(np.sqrt(sigma_n_sq) * rng.standard_normal())


def true_optimum(objective, t: int | None = None) -> tuple[int, float]:
    if t is not None and t != objective.t:
        raise ValueError(f"objective is at step {objective.t}, not {t}")
    idx = int(np.argmax(objective.values))
    return idx, float(objective.values[idx])
