"""Experiment configuration: schema, TOML I/O, dotted overrides and presets."""

from __future__ import annotations

import copy
from pathlib import Path
from typing import Literal

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python 3.10
    import tomli
import tomli_w
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..policies import reset_period


class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DomainConfig(_Model):
    kind: Literal["grid", "arms"] = "grid"
    bounds: list[tuple[float, float]] = [(0.0, 1.0), (0.0, 1.0)]
    resolution: int | list[int] = 50
    n_arms: int | None = None


class KernelConfig(_Model):
    kind: Literal["se", "empirical"] = "se"
    lengthscales: float | list[float] = 0.2
    signal_variance: float = Field(1.0, gt=0)
    # empirical matrix CSV; omitted for arms-replay means "use the training covariance"
    path: str | None = None


class ObjectiveConfig(_Model):
    kind: Literal["markov", "sudden", "arms-replay"] = "markov"
    epsilon: float | list[tuple[int, float]] = 0.0
    change_step: int = Field(100, ge=1)
    path: str | None = None
    train_days: tuple[int, int] | None = None
    test_days: tuple[int, int] | None = None
    steps_per_day: int = Field(1, ge=1)
    add_noise: bool = True

    @field_validator("epsilon")
    @classmethod
    def _eps_range(cls, v):
        values = [v] if isinstance(v, float) else [e for _, e in v]
        if any(not 0.0 <= e <= 1.0 for e in values):
            raise ValueError("epsilon must lie in [0, 1]")
        return v

    @property
    def max_epsilon(self) -> float:
        return self.epsilon if isinstance(self.epsilon, float) else max(e for _, e in self.epsilon)


class BetaConfig(_Model):
    kind: Literal["approximate", "exact"] = "approximate"
    c1: float = Field(0.8, gt=0)
    c2: float = Field(4.0, gt=0)
    delta: float = Field(0.1, gt=0, lt=1)
    r: float = Field(1.0, gt=0)
    a1: float = Field(1.0, ge=0)
    b1: float = Field(1.0, ge=0)


DISPLAY_NAMES = {
    "gp_ucb": "GP-UCB",
    "tv_gp_ucb": "TV-GP-UCB",
    "r_gp_ucb": "R-GP-UCB",
    "et_gp_ucb": "ET-GP-UCB",
}


class PolicyConfig(_Model):
    kind: Literal["gp_ucb", "tv_gp_ucb", "r_gp_ucb", "et_gp_ucb"]
    name: str | None = None
    epsilon: float | None = Field(None, ge=0, le=1)
    reset_period: int | None = Field(None, ge=1)
    delta_B: float = Field(0.1, gt=0, lt=1)

    @model_validator(mode="after")
    def _params(self):
        if self.kind == "tv_gp_ucb" and self.epsilon is None:
            raise ValueError("tv_gp_ucb needs epsilon")
        if self.kind == "r_gp_ucb" and self.epsilon is None and self.reset_period is None:
            raise ValueError("r_gp_ucb needs epsilon or reset_period")
        return self

    @property
    def label(self) -> str:
        return self.name or DISPLAY_NAMES[self.kind]

    def period(self, horizon: int) -> int:
        if self.reset_period is not None:
            return self.reset_period
        return reset_period(self.epsilon, horizon)


class BoundConfig(_Model):
    """Smoothness tail constants used only by the bound evaluator."""

    a0: float = Field(1.0, ge=0)
    b0: float = Field(1.0, ge=0)
    a1: float = Field(1.0, ge=0)
    b1: float = Field(1.0, ge=0)
    L: float = Field(1.0, ge=1)
    L_f: float = Field(1.0, ge=1)
    delta: float = Field(0.1, gt=0, lt=1)
    quantile_delta: float = Field(0.2, gt=0, lt=1)


class ExperimentConfig(_Model):
    name: str = "experiment"
    horizon: int = Field(ge=1)
    noise_var: float = Field(gt=0)
    seeds: list[int] = Field(min_length=1)
    output: str = "results"
    domain: DomainConfig = DomainConfig()
    kernel: KernelConfig = KernelConfig()
    objective: ObjectiveConfig = ObjectiveConfig()
    beta: BetaConfig = BetaConfig()
    policies: list[PolicyConfig] = Field(min_length=1)
    bound: BoundConfig = BoundConfig()

    @model_validator(mode="after")
    def _consistency(self):
        labels = [p.label for p in self.policies]
        if len(set(labels)) != len(labels):
            raise ValueError(f"policy names must be unique, got {labels}")
        if self.objective.kind == "arms-replay":
            o = self.objective
            if o.path is None or o.train_days is None or o.test_days is None:
                raise ValueError("arms-replay objective needs path, train_days and test_days")
            if self.domain.kind != "arms" or self.kernel.kind != "empirical":
                raise ValueError("arms-replay needs an arms domain and an empirical kernel")
        elif self.domain.kind == "grid":
            if self.kernel.kind != "se":
                raise ValueError("grid domains need the se kernel")
            dims = len(self.domain.bounds)
            if isinstance(self.kernel.lengthscales, list) and len(self.kernel.lengthscales) != dims:
                raise ValueError(f"need {dims} lengthscales, got {len(self.kernel.lengthscales)}")
            res = self.domain.resolution
            if isinstance(res, list) and len(res) != dims:
                raise ValueError(f"need {dims} resolutions, got {len(res)}")
        else:
            if self.kernel.kind != "empirical" or self.kernel.path is None:
                raise ValueError("arms domains need an empirical kernel with a matrix path")
        return self

    def policy(self, label: str) -> PolicyConfig:
        for p in self.policies:
            if p.label == label:
                return p
        raise KeyError(label)


def validate(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = tomli.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return validate(data)


def to_dict(config: ExperimentConfig) -> dict:
    return config.model_dump(mode="json", exclude_none=True)


def dumps(config: ExperimentConfig) -> str:
    return tomli_w.dumps(to_dict(config))


def _parse_value(text: str):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def apply_overrides(config: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    """Apply ``key.sub=value`` overrides; list items are addressed by index."""
    data = copy.deepcopy(to_dict(config))
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        parts = key.strip().split(".")
        node = data
        try:
            for part in parts[:-1]:
                node = node[int(part)] if isinstance(node, list) else node.setdefault(part, {})
            last = parts[-1]
            if isinstance(node, list):
                node[int(last)] = _parse_value(raw.strip())
            else:
                node[last] = _parse_value(raw.strip())
        except (IndexError, ValueError, TypeError, AttributeError) as exc:
            raise ConfigError(f"cannot apply override {item!r}: {exc}") from exc
    return validate(data)


def parse_seeds(text: str) -> list[int]:
    """``"0..49"`` (inclusive) or ``"1,4,7"`` or a mix such as ``"0..3,10"``."""
    seeds: list[int] = []
    try:
        for chunk in text.split(","):
            chunk = chunk.strip()
            if ".." in chunk:
                lo, hi = chunk.split("..")
                seeds.extend(range(int(lo), int(hi) + 1))
            elif chunk:
                seeds.append(int(chunk))
    except ValueError as exc:
        raise ConfigError(f"bad seed specification {text!r}") from exc
    if not seeds:
        raise ConfigError("seed specification is empty")
    return seeds


# -- presets ---------------------------------------------------------------

_WITHIN_MODEL = dict(
    horizon=400,
    noise_var=0.02,
    seeds=list(range(50)),
    domain=dict(kind="grid", bounds=[[0.0, 1.0], [0.0, 1.0]], resolution=50),
    kernel=dict(kind="se", lengthscales=[0.2, 0.2]),
    beta=dict(kind="approximate", c1=0.4, c2=4.0),
)


def _within_model(eps: float) -> dict:
    return dict(
        _WITHIN_MODEL,
        name=f"within-model-eps{eps}",
        objective=dict(kind="markov", epsilon=eps),
        policies=[
            dict(kind="gp_ucb"),
            dict(kind="tv_gp_ucb", epsilon=eps),
            dict(kind="r_gp_ucb", epsilon=eps),
            dict(kind="et_gp_ucb", delta_B=0.1),
        ],
    )


def _misspecified() -> dict:
    return dict(
        _WITHIN_MODEL,
        name="within-model-misspecified",
        objective=dict(kind="markov", epsilon=0.05),
        policies=[
            dict(kind="gp_ucb"),
            dict(kind="tv_gp_ucb", epsilon=0.001),
            dict(kind="r_gp_ucb", epsilon=0.001),
            dict(kind="et_gp_ucb", delta_B=0.1),
        ],
    )


SENSITIVITY_DELTAS = (0.005, 0.01, 0.05, 0.1, 0.5)


def _sensitivity(eps: float) -> dict:
    return dict(
        _WITHIN_MODEL,
        name=f"sensitivity-eps{eps}",
        objective=dict(kind="markov", epsilon=eps),
        policies=[dict(kind="et_gp_ucb", name=f"ET-GP-UCB(delta_B={d})", delta_B=d) for d in SENSITIVITY_DELTAS],
    )


def _monte_carlo(eps: float) -> dict:
    return dict(
        _WITHIN_MODEL,
        name=f"mc-eps{eps}",
        horizon=200,
        seeds=list(range(1000)),
        objective=dict(kind="markov", epsilon=eps),
        policies=[dict(kind="et_gp_ucb", delta_B=0.1)],
    )


def _sudden_change() -> dict:
    return dict(
        _WITHIN_MODEL,
        name="sudden-change",
        horizon=300,
        objective=dict(kind="sudden", change_step=100),
        beta=dict(kind="approximate", c1=0.8, c2=4.0),
        policies=[
            dict(kind="gp_ucb"),
            dict(kind="tv_gp_ucb", epsilon=0.03),
            dict(kind="r_gp_ucb", reset_period=29),
            dict(kind="et_gp_ucb", delta_B=0.1),
        ],
    )


PRESETS = {
    "within-model-eps0.01": lambda: _within_model(0.01),
    "within-model-eps0.03": lambda: _within_model(0.03),
    "within-model-eps0.05": lambda: _within_model(0.05),
    "within-model-misspecified": _misspecified,
    "sensitivity-eps0.01": lambda: _sensitivity(0.01),
    "sensitivity-eps0.03": lambda: _sensitivity(0.03),
    "sensitivity-eps0.05": lambda: _sensitivity(0.05),
    "sudden-change": _sudden_change,
    "mc-eps0": lambda: _monte_carlo(0.0),
    "mc-eps0.03": lambda: _monte_carlo(0.03),
    "mc-eps0.1": lambda: _monte_carlo(0.1),
}


def preset(name: str) -> ExperimentConfig:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
    data = copy.deepcopy(factory())
    data["objective"]["epsilon"] = float(data["objective"].get("epsilon", 0.0))
    return validate(data)
