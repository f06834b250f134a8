from .config import ConfigError, ExperimentConfig, PRESETS, apply_overrides, load_config, preset
from .diagnostics import BoundConstants, StoppingTimes, evaluate_bound, stopping_time_histogram
from .ingest import ArmsReplayDataset, IngestError, ingest_arms_csv
from .output import emit_csv
from .runner import RegretTrace, run_experiment

__all__ = [
    "ArmsReplayDataset",
    "BoundConstants",
    "ConfigError",
    "ExperimentConfig",
    "IngestError",
    "PRESETS",
    "RegretTrace",
    "StoppingTimes",
    "apply_overrides",
    "emit_csv",
    "evaluate_bound",
    "ingest_arms_csv",
    "load_config",
    "preset",
    "run_experiment",
    "stopping_time_histogram",
]
