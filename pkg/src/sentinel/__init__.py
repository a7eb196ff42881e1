"""Deterministic patrol-drone defense simulator with embedded enforcement
agents, plus the batch harness and summary tooling around it."""

from .config import ConfigError, SimConfig, default_config, load_config, validate
from .experiment import RunRecord, mix_seed, read_records, run_batch, run_episode, write_records
from .stats import AggregateStats, aggregate
from .world import WorldState, initial_world

__version__ = "0.1.0"

__all__ = [
    "AggregateStats",
    "ConfigError",
    "RunRecord",
    "SimConfig",
    "WorldState",
    "aggregate",
    "default_config",
    "initial_world",
    "load_config",
    "mix_seed",
    "read_records",
    "run_batch",
    "run_episode",
    "validate",
    "write_records",
]
