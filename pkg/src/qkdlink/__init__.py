"""qkdlink: deterministic link-budget simulator for satellite-ground
quantum key distribution.

Computes atmospheric transmittance, QBER and secure keyrate versus
zenith angle for BB84, B92, BBM92 and E91 over uplink-night,
downlink-day and downlink-night scenarios.
"""

__version__ = "0.1.0"

from .config import (
    MAX_ZENITH_DEG,
    NAMED_SCENARIOS,
    Scenario,
    apply_overrides,
    load_scenario,
    named_default,
    save_scenario,
)
from .link import TransmittanceBreakdown, total_transmittance
from .pipeline import PointResult, evaluate_point
from .protocols import ClickModel, CoincidenceModel, ProtocolKind
from .sweep import Metric, SweepSpec, SweepTable, find_crossover, run_sweep

__all__ = [
    "MAX_ZENITH_DEG",
    "NAMED_SCENARIOS",
    "Scenario",
    "apply_overrides",
    "load_scenario",
    "named_default",
    "save_scenario",
    "TransmittanceBreakdown",
    "total_transmittance",
    "PointResult",
    "evaluate_point",
    "ClickModel",
    "CoincidenceModel",
    "ProtocolKind",
    "Metric",
    "SweepSpec",
    "SweepTable",
    "find_crossover",
    "run_sweep",
    "__version__",
]
