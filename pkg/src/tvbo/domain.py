"""Finite candidate sets: regular grids over boxes, or discrete arms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Domain:
    kind: str
    bounds: tuple[tuple[float, float], ...] = ()
    resolution: tuple[int, ...] = ()
    n_arms: int = 0

    def __post_init__(self):
        if self.kind == "grid":
            if not self.bounds or len(self.bounds) != len(self.resolution):
                raise ValueError("grid domain needs one resolution per bounded dimension")
            if any(hi <= lo for lo, hi in self.bounds):
                raise ValueError(f"empty interval in bounds {self.bounds}")
            if any(r < 1 for r in self.resolution):
                raise ValueError("grid resolution must be >= 1")
        elif self.kind == "arms":
            if self.n_arms < 1:
                raise ValueError("arms domain needs at least one arm")
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def grid(cls, bounds, resolution) -> "Domain":
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if np.ndim(resolution) == 0:
            resolution = (int(resolution),) * len(bounds)
        return cls("grid", bounds=bounds, resolution=tuple(int(r) for r in resolution))

    @classmethod
    def arms(cls, n_arms: int) -> "Domain":
        return cls("arms", n_arms=int(n_arms))

    @property
    def dim(self) -> int:
        return len(self.bounds) if self.kind == "grid" else 1

    @cached_property
    def candidates(self) -> np.ndarray:
        """(n, dim) array; grid points are ordered with the last axis fastest."""
        if self.kind == "arms":
            pts = np.arange(self.n_arms, dtype=float)[:, None]
        else:
            axes = [
                np.linspace(lo, hi, r) if r > 1 else np.array([(lo + hi) / 2])
                for (lo, hi), r in zip(self.bounds, self.resolution)
            ]
            mesh = np.meshgrid(*axes, indexing="ij")
            pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        pts.setflags(write=False)
        return pts

    def __len__(self):
        return len(self.candidates)

    def nearest_index(self, x) -> int:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = ((self.candidates - x[None, :]) ** 2).sum(1)
        return int(np.argmin(d))
