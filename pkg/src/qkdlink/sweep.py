"""Zenith-angle sweep engine and crossover detection.

Sweeps are deterministic: identical inputs produce identical tables,
rows ordered by (scenario, theta). Rows whose evaluation raises a
domain error carry the message instead of poisoning the whole sweep.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .config import MAX_ZENITH_DEG, Scenario
from .errors import DomainError, QkdLinkError, ValidationError
from .pipeline import PointResult, build_context, evaluate_context
from .protocols import ProtocolKind

ALL_PROTOCOLS = tuple(ProtocolKind)


class Metric(enum.Enum):
    QBER = "qber"
    KEYRATE = "keyrate"


@dataclass(frozen=True)
class SweepSpec:
    theta_start_deg: float = 0.0
    theta_end_deg: float = MAX_ZENITH_DEG
    theta_step_deg: float = 1.0
    scenarios: Tuple[str, ...] = ("uplink-night", "downlink-day", "downlink-night")
    protocols: Tuple[ProtocolKind, ...] = ALL_PROTOCOLS

    def __post_init__(self):
        if not 0.0 <= self.theta_start_deg < self.theta_end_deg <= MAX_ZENITH_DEG:
            raise ValidationError(
                "theta_range", f"need 0 <= start < end <= {MAX_ZENITH_DEG}"
            )
        if self.theta_step_deg <= 0.0:
            raise ValidationError("theta_step", "step must be > 0")
        if not self.scenarios:
            raise ValidationError("scenarios", "need at least one scenario")
        if not self.protocols:
            raise ValidationError("protocols", "need at least one protocol")

    def angles(self) -> List[float]:
        """Sample angles including the end point (floating-point safe)."""
        n = int(math.floor((self.theta_end_deg - self.theta_start_deg) / self.theta_step_deg + 1e-9))
        values = [self.theta_start_deg + i * self.theta_step_deg for i in range(n + 1)]
        if values[-1] < self.theta_end_deg - 1e-9:
            values.append(self.theta_end_deg)
        return values


@dataclass(frozen=True)
class SweepRow:
    scenario: str
    theta_deg: float
    result: Optional[PointResult]
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepTable:
    spec: SweepSpec
    rows: Tuple[SweepRow, ...] = field(default_factory=tuple)

    def scenario_rows(self, name: str) -> List[SweepRow]:
        return [r for r in self.rows if r.scenario == name]

    def scenario_names(self) -> List[str]:
        seen: List[str] = []
        for r in self.rows:
            if r.scenario not in seen:
                seen.append(r.scenario)
        return seen


def run_sweep(spec: SweepSpec, scenarios: Dict[str, Scenario]) -> SweepTable:
    """Evaluate every (scenario, theta) pair of the spec.

    ``scenarios`` maps each name in the spec to a validated scenario.
    Rows are emitted sorted by (scenario order in the spec, theta).
    """
    missing = [name for name in spec.scenarios if name not in scenarios]
    if missing:
        raise ValidationError("scenarios", f"unresolved scenario names: {', '.join(missing)}")
    rows: List[SweepRow] = []
    for name in spec.scenarios:
        ctx = build_context(scenarios[name])
        for theta in spec.angles():
            try:
                rows.append(SweepRow(name, theta, evaluate_context(ctx, theta)))
            except QkdLinkError as exc:
                rows.append(SweepRow(name, theta, None, error=str(exc)))
    return SweepTable(spec=spec, rows=tuple(rows))


def _series(
    table: SweepTable, metric: Metric, kind: ProtocolKind
) -> Tuple[List[float], List[float]]:
    names = table.scenario_names()
    if len(names) != 1:
        raise DomainError(
            "crossover detection needs a single-scenario table; "
            f"got {len(names)} scenarios"
        )
    thetas: List[float] = []
    values: List[float] = []
    for row in table.rows:
        if row.result is None:
            continue
        thetas.append(row.theta_deg)
        pr = row.result.protocols[kind]
        values.append(pr.qber if metric is Metric.QBER else pr.rate)
    if len(thetas) < 2:
        raise DomainError("crossover detection needs at least two evaluated rows")
    return thetas, values


def crossover_from_series(
    thetas: Sequence[float],
    first: Sequence[float],
    second: Sequence[float],
    metric: Metric,
    qber_gap_threshold: float = 0.05,
) -> Optional[float]:
    """Crossover angle of two sampled curves; None if they never cross.

    Keyrate crossings are sign changes of the difference, located by
    linear interpolation between adjacent samples. QBER differences for
    the natural pairs never change sign, so that metric reports the
    first angle where the relative gap exceeds ``qber_gap_threshold``
    of the larger value (again interpolated).
    """
    if len(thetas) < 2:
        raise DomainError("crossover detection needs at least two samples")
    if metric is Metric.KEYRATE:
        signal = [a - b for a, b in zip(first, second)]
        for theta0, theta1, s0, s1 in zip(thetas[:-1], thetas[1:], signal[:-1], signal[1:]):
            if s0 == 0.0 and s1 == 0.0:
                continue
            if (s0 > 0 >= s1) or (s0 < 0 <= s1):
                if s1 == s0:
                    return theta0
                return theta0 + (theta1 - theta0) * (0.0 - s0) / (s1 - s0)
        return None
    gaps = [
        abs(a - b) / max(a, b) if max(a, b) > 0 else 0.0
        for a, b in zip(first, second)
    ]
    if gaps[0] > qber_gap_threshold:
        return thetas[0]
    for theta0, theta1, g0, g1 in zip(thetas[:-1], thetas[1:], gaps[:-1], gaps[1:]):
        if g0 <= qber_gap_threshold < g1:
            return theta0 + (theta1 - theta0) * (qber_gap_threshold - g0) / (g1 - g0)
    return None


def find_crossover(
    table: SweepTable,
    metric: Metric,
    pair: Tuple[ProtocolKind, ProtocolKind],
    qber_gap_threshold: float = 0.05,
) -> Optional[float]:
    """First zenith angle where the two protocols change order; None if
    the single-scenario table never qualifies."""
    thetas, first = _series(table, metric, pair[0])
    _, second = _series(table, metric, pair[1])
    return crossover_from_series(thetas, first, second, metric, qber_gap_threshold)


def gap_profile(
    table: SweepTable,
    metric: Metric,
    pair: Tuple[ProtocolKind, ProtocolKind],
) -> List[Tuple[float, float, float, float]]:
    """(theta, first, second, relative gap) rows for reporting."""
    thetas, first = _series(table, metric, pair[0])
    _, second = _series(table, metric, pair[1])
    out = []
    for theta, a, b in zip(thetas, first, second):
        gap = abs(a - b) / max(a, b) if max(a, b) > 0 else 0.0
        out.append((theta, a, b, gap))
    return out
