"""Render qkdlink sweep tables into the five figure families.

The input is the frozen sweep CSV (see the qkdlink README); the output
is a PNG or SVG with one panel per link direction. QBER plots on the
left axis, keyrate on a log right axis, transmittance on a log axis of
its own. Rendering is deterministic: the same CSV yields byte-identical
files.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

#: Frozen column set of the sweep CSV this package consumes.
SWEEP_COLUMNS = (
    "scenario",
    "theta_deg",
    "L_m",
    "eta_geo",
    "eta_scatt",
    "eta_turb",
    "eta_bw",
    "eta_total",
    "stray_per_window",
    "p_click",
    "p_coin",
    "qber_bb84",
    "rate_bb84",
    "qber_b92",
    "rate_b92",
    "qber_bbm92",
    "rate_bbm92",
    "qber_e91",
    "rate_e91",
)

FIGURES = ("transmittance", "bb84", "b92", "bbm92", "e91")

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

# Stable ids inside SVG output; without a salt they vary per process.
plt.rcParams["svg.hashsalt"] = "qkd-figures"


class FigureError(Exception):
    """Bad input table or figure request."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    figure: str
    output_path: str


def load_sweep_csv(path: str | Path) -> List[Dict[str, object]]:
    """Read a sweep CSV, checking the frozen column set.

    Returns one dict per row with floats parsed; rows whose cells are
    nan (error rows emitted by the sweep engine) are dropped.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in SWEEP_COLUMNS:
            if column not in header:
                raise FigureError(f"missing column '{column}' in {path}")
        rows: List[Dict[str, object]] = []
        for raw in reader:
            row: Dict[str, object] = {"scenario": raw["scenario"]}
            ok = True
            for column in SWEEP_COLUMNS[1:]:
                value = float(raw[column])
                if math.isnan(value):
                    ok = False
                    break
                row[column] = value
            if ok:
                rows.append(row)
    if not rows:
        raise FigureError(f"no plottable rows in {path}")
    return rows


def _direction(scenario: str) -> str:
    return "uplink" if scenario.lower().startswith("uplink") else "downlink"


def _by_direction(rows: List[Dict[str, object]]) -> Dict[str, Dict[str, List[Dict[str, object]]]]:
    grouped: Dict[str, Dict[str, List[Dict[str, object]]]] = {}
    for row in rows:
        direction = _direction(str(row["scenario"]))
        grouped.setdefault(direction, {}).setdefault(str(row["scenario"]), []).append(row)
    for scenarios in grouped.values():
        for series in scenarios.values():
            series.sort(key=lambda r: r["theta_deg"])
    return grouped


def _color(index: int) -> str:
    return _COLORS[index % len(_COLORS)]


def _render_transmittance(grouped, fig):
    axes = fig.subplots(1, len(grouped), squeeze=False)[0]
    for ax, direction in zip(axes, sorted(grouped)):
        scenarios = grouped[direction]
        for i, name in enumerate(sorted(scenarios)):
            series = scenarios[name]
            ax.semilogy(
                [r["theta_deg"] for r in series],
                [r["eta_total"] for r in series],
                color=_color(i),
                label=name,
            )
        ax.set_title(f"{direction} transmittance")
        ax.set_xlabel("zenith angle (deg)")
        ax.set_ylabel("total transmittance")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(loc="lower left", fontsize=8)


def _render_protocol(grouped, fig, protocol: str):
    qber_col = f"qber_{protocol}"
    rate_col = f"rate_{protocol}"
    axes = fig.subplots(1, len(grouped), squeeze=False)[0]
    for ax, direction in zip(axes, sorted(grouped)):
        scenarios = grouped[direction]
        rate_ax = ax.twinx()
        for i, name in enumerate(sorted(scenarios)):
            series = scenarios[name]
            thetas = [r["theta_deg"] for r in series]
            ax.plot(
                thetas,
                [r[qber_col] for r in series],
                color=_color(i),
                linestyle="-",
                label=f"{name} QBER",
            )
            positive = [(t, r[rate_col]) for t, r in zip(thetas, series) if r[rate_col] > 0.0]
            if positive:
                rate_ax.semilogy(
                    [t for t, _ in positive],
                    [v for _, v in positive],
                    color=_color(i),
                    linestyle="--",
                    label=f"{name} keyrate",
                )
        ax.set_title(f"{protocol.upper()} {direction}")
        ax.set_xlabel("zenith angle (deg)")
        ax.set_ylabel("QBER")
        rate_ax.set_ylabel("keyrate (bits/pulse)")
        ax.grid(True, alpha=0.3)
        handles, labels = ax.get_legend_handles_labels()
        rhandles, rlabels = rate_ax.get_legend_handles_labels()
        ax.legend(handles + rhandles, labels + rlabels, loc="center left", fontsize=7)


def render(spec: FigureSpec) -> Path:
    """Render one figure family to ``spec.output_path`` (.png or .svg)."""
    if spec.figure not in FIGURES:
        raise FigureError(f"unknown figure '{spec.figure}' (choose from {', '.join(FIGURES)})")
    out = Path(spec.output_path)
    if out.suffix.lower() not in (".png", ".svg"):
        raise FigureError(f"unsupported output format '{out.suffix}' (use .png or .svg)")
    rows = load_sweep_csv(spec.input_csv)
    grouped = _by_direction(rows)

    fig = plt.figure(figsize=(6.0 * len(grouped), 4.2), dpi=150)
    try:
        if spec.figure == "transmittance":
            _render_transmittance(grouped, fig)
        else:
            _render_protocol(grouped, fig, spec.figure)
        fig.tight_layout()
        # Date metadata would break byte-for-byte determinism of SVGs.
        metadata = {"Date": None} if out.suffix.lower() == ".svg" else None
        fig.savefig(out, metadata=metadata)
    finally:
        plt.close(fig)
    return out
