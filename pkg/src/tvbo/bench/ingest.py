"""Sensor-style replay data: long CSV (``arm_id,time_index,value``) to a normalized matrix.

Gap filling is deterministic: the table is pivoted onto every integer time
index between the first and last observation, each arm is forward-filled,
and leading steps where some arm has no reading yet are dropped. Day ranges
are half-open ``[start, stop)`` with ``steps_per_day`` time indices per day.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from ..kernels import EmpiricalKernel

COLUMNS = ("arm_id", "time_index", "value")


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class ArmsReplayDataset:
    arm_ids: tuple
    train: np.ndarray  # (n_train_steps, n_arms), normalized
    test: np.ndarray  # (n_test_steps, n_arms), normalized with training stats
    mean: np.ndarray
    std: np.ndarray
    covariance: np.ndarray

    @property
    def n_arms(self) -> int:
        return len(self.arm_ids)

    def kernel(self) -> EmpiricalKernel:
        return EmpiricalKernel(self.covariance)


def _rows(frame: pd.DataFrame, days, steps_per_day: int, what: str) -> np.ndarray:
    start, stop = (int(d) for d in days)
    lo, hi = start * steps_per_day, stop * steps_per_day
    if hi <= lo:
        raise IngestError(f"{what} range {days} is empty")
    missing = sorted(set(range(lo, hi)) - set(frame.index))
    if missing:
        raise IngestError(f"{what} range needs time indices {lo}..{hi - 1}; {len(missing)} missing after gap fill")
    return frame.loc[lo : hi - 1].to_numpy(dtype=float)


def ingest_arms_csv(path, train_days, test_days, steps_per_day: int = 1) -> ArmsReplayDataset:
    path = Path(path)
    try:
        raw = pd.read_csv(path, encoding="utf-8")
    except FileNotFoundError as exc:
        raise IngestError(f"data file not found: {path}") from exc
    if tuple(raw.columns) != COLUMNS:
        raise IngestError(f"expected header {','.join(COLUMNS)}, got {','.join(map(str, raw.columns))}")
    if raw.empty:
        raise IngestError("data file has no rows")
    raw = raw.dropna(subset=["value"])
    table = raw.pivot_table(index="time_index", columns="arm_id", values="value", aggfunc="last")
    table = table.reindex(range(int(table.index.min()), int(table.index.max()) + 1))
    table = table.ffill()
    complete = table.notna().all(axis=1)
    if not complete.any():
        raise IngestError("no time step has readings for every arm")
    table = table.loc[complete.idxmax() :]

    train = _rows(table, train_days, steps_per_day, "train")
    test = _rows(table, test_days, steps_per_day, "test")
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    dead = [a for a, s in zip(table.columns, std) if not s > 0]
    if dead:
        raise IngestError(f"zero variance in training split for arms {dead}")
    train_n = (train - mean) / std
    test_n = (test - mean) / std
    cov = train_n.T @ train_n / len(train_n)
    return ArmsReplayDataset(
        arm_ids=tuple(table.columns),
        train=train_n,
        test=test_n,
        mean=mean,
        std=std,
        covariance=0.5 * (cov + cov.T),
    )
