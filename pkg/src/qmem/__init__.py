"""Integrity benchmarking of error-corrected quantum memories."""

__version__ = "0.1.0"

from .codes import AXES, CODE_NAMES, CodeSpec, get_code
from .dense import OracleUnavailable
from .ec_cycles import EC_STYLES, make_cycle
from .exact import exact_channel, exact_integrity, powerful_bob
from .noise import NoiseParams
from .protocol import (
    ExperimentConfig,
    IntegrityEstimate,
    MilestoneReport,
    estimate_integrity,
    evaluate_milestones,
    interruption_sweep,
)
from .tableau import ConfigurationError

__all__ = [
    "AXES",
    "CODE_NAMES",
    "EC_STYLES",
    "CodeSpec",
    "ConfigurationError",
    "ExperimentConfig",
    "IntegrityEstimate",
    "MilestoneReport",
    "NoiseParams",
    "OracleUnavailable",
    "estimate_integrity",
    "evaluate_milestones",
    "exact_channel",
    "exact_integrity",
    "get_code",
    "interruption_sweep",
    "make_cycle",
    "powerful_bob",
]
