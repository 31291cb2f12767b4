"""Configuration, experiment orchestration and tabular output for the CLI."""

from floqbound.harness.config import ConfigError, ExperimentConfig, parse_config, serialize_config
from floqbound.harness.experiments import (
    cmd_compare,
    cmd_derive,
    cmd_fig,
    cmd_strobe,
    cmd_sweep_omega,
)
from floqbound.harness.table import ResultTable

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultTable",
    "cmd_compare",
    "cmd_derive",
    "cmd_fig",
    "cmd_strobe",
    "cmd_sweep_omega",
    "parse_config",
    "serialize_config",
]
