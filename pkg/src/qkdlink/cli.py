"""Command-line surface: point evaluation, zenith sweeps, crossover
reports. Sweeps emit CSV (frozen column order, 9 significant digits)
or JSON for downstream tooling such as the figure renderer.

Exit codes: 0 success, 2 validation or usage error, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Dict, List, Optional, Sequence, TextIO

from . import __version__
from .config import NAMED_SCENARIOS, Scenario, apply_overrides, load_scenario
from .errors import QkdLinkError, ScenarioParseError, ValidationError
from .pipeline import PointResult, evaluate_point
from .protocols import ProtocolKind
from .sweep import (
    Metric,
    SweepSpec,
    SweepTable,
    crossover_from_series,
    find_crossover,
    gap_profile,
    run_sweep,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3

#: Frozen sweep column set; changing the order breaks downstream readers.
CSV_COLUMNS = (
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

_PROTOCOL_ORDER = (ProtocolKind.BB84, ProtocolKind.B92, ProtocolKind.BBM92, ProtocolKind.E91)


def _fmt(value: float) -> str:
    """Serialize with 9 significant digits for stable golden files."""
    if math.isnan(value):
        return "nan"
    return format(value, ".9g")


def _row_values(result: Optional[PointResult], scenario: str, theta: float) -> List[str]:
    if result is None:
        values = [scenario, _fmt(theta)] + ["nan"] * (len(CSV_COLUMNS) - 2)
        return values
    b = result.breakdown
    cells = [
        result.scenario,
        _fmt(result.theta_deg),
        _fmt(b.slant_distance_m),
        _fmt(b.eta_geo),
        _fmt(b.eta_scatt),
        _fmt(b.eta_turb),
        _fmt(b.eta_bw),
        _fmt(b.eta_total),
        _fmt(result.stray_count),
        _fmt(result.clicks.p_click),
        _fmt(result.coincidences.p_coin),
    ]
    for kind in _PROTOCOL_ORDER:
        pr = result.protocols[kind]
        cells.append(_fmt(pr.qber))
        cells.append(_fmt(pr.rate))
    return cells


def write_csv(table: SweepTable, stream: TextIO) -> None:
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for row in table.rows:
        stream.write(",".join(_row_values(row.result, row.scenario, row.theta_deg)) + "\n")


def table_to_json(table: SweepTable) -> dict:
    rows = []
    for row in table.rows:
        record: Dict[str, object] = {"scenario": row.scenario, "theta_deg": row.theta_deg}
        if row.error is not None:
            record["error"] = row.error
        if row.result is not None:
            values = _row_values(row.result, row.scenario, row.theta_deg)
            for column, cell in zip(CSV_COLUMNS[2:], values[2:]):
                record[column] = float(cell)
        rows.append(record)
    return {"columns": list(CSV_COLUMNS), "rows": rows}


def _point_report(result: PointResult) -> str:
    b = result.breakdown
    t = result.turbulence
    lines = [
        f"scenario            {result.scenario}",
        f"zenith_deg          {_fmt(result.theta_deg)}",
        f"slant_distance_m    {_fmt(b.slant_distance_m)}",
        "",
        "transmittance",
        f"  eta_geo           {_fmt(b.eta_geo)}",
        f"  eta_scatt         {_fmt(b.eta_scatt)}",
        f"  eta_turb          {_fmt(b.eta_turb)}",
        f"  eta_bw            {_fmt(b.eta_bw)}",
        f"  eta_optics        {_fmt(b.eta_optics)}",
        f"  eta_total         {_fmt(b.eta_total)}",
        "",
        "turbulence",
        f"  cn2_avg           {_fmt(t.cn2_avg)}",
        f"  fried_r0_m        {_fmt(t.fried_r0_m)}",
        f"  rytov_plane       {_fmt(t.rytov_plane)}",
        f"  rytov_used        {_fmt(t.rytov_used)} ({t.wave.value})",
        f"  aperture_d        {_fmt(t.aperture_d)}",
        f"  scint_index       {_fmt(t.scint_index)}",
        f"  a_sci_db          {_fmt(t.a_sci_db)}",
        f"  wander_var_m2     {_fmt(t.wander_variance_m2)}",
        f"  pointing_var_m2   {_fmt(t.pointing_variance_m2)}",
        f"  wander_scint      {_fmt(t.wander_scint)}",
        f"  a_bw_db           {_fmt(t.a_bw_db)}",
        "",
        "counts per window",
        f"  stray_count       {_fmt(result.stray_count)}",
        f"  p_stray           {_fmt(result.p_stray)}",
        f"  p_signal          {_fmt(result.clicks.p_signal)}",
        f"  p_dark            {_fmt(result.clicks.p_dark)}",
        f"  p_click           {_fmt(result.clicks.p_click)}",
        f"  p_true            {_fmt(result.coincidences.p_true)}",
        f"  p_false           {_fmt(result.coincidences.p_false)}",
        f"  p_coin            {_fmt(result.coincidences.p_coin)}",
        "",
        "security (bb84 reference)",
        f"  p_prime           {_fmt(result.security.p_prime)}",
        f"  beta              {_fmt(result.security.beta_sec)}",
        f"  tau_prime         {_fmt(result.security.tau_prime)}",
        f"  f_ec              {_fmt(result.security.f_ec)}",
        "",
        "protocols             qber           rate",
    ]
    for kind in _PROTOCOL_ORDER:
        pr = result.protocols[kind]
        lines.append(f"  {kind.value:<8}          {_fmt(pr.qber):<14} {_fmt(pr.rate)}")
    return "\n".join(lines) + "\n"


def _point_json(result: PointResult) -> dict:
    b = result.breakdown
    t = result.turbulence
    return {
        "scenario": result.scenario,
        "theta_deg": result.theta_deg,
        "slant_distance_m": b.slant_distance_m,
        "transmittance": {
            "eta_geo": b.eta_geo,
            "eta_scatt": b.eta_scatt,
            "eta_turb": b.eta_turb,
            "eta_bw": b.eta_bw,
            "eta_optics": b.eta_optics,
            "eta_total": b.eta_total,
        },
        "turbulence": {
            "cn2_avg": t.cn2_avg,
            "cn2_integral": t.cn2_integral,
            "fried_r0_m": t.fried_r0_m,
            "rytov_plane": t.rytov_plane,
            "rytov_used": t.rytov_used,
            "wave": t.wave.value,
            "aperture_d": t.aperture_d,
            "scint_index": t.scint_index,
            "a_sci_db": t.a_sci_db,
            "wander_variance_m2": t.wander_variance_m2,
            "pointing_variance_m2": t.pointing_variance_m2,
            "wander_scint": t.wander_scint,
            "a_bw_db": t.a_bw_db,
        },
        "counts": {
            "stray_count": result.stray_count,
            "p_stray": result.p_stray,
            "p_signal": result.clicks.p_signal,
            "p_dark": result.clicks.p_dark,
            "p_click": result.clicks.p_click,
            "p_true": result.coincidences.p_true,
            "p_false": result.coincidences.p_false,
            "p_coin": result.coincidences.p_coin,
        },
        "security": {
            "p_prime": result.security.p_prime,
            "beta": result.security.beta_sec,
            "tau_prime": result.security.tau_prime,
            "f_ec": result.security.f_ec,
        },
        "protocols": {
            kind.value: {"qber": pr.qber, "rate": pr.rate}
            for kind, pr in ((k, result.protocols[k]) for k in _PROTOCOL_ORDER)
        },
    }


def _load_with_overrides(name: str, overrides: Sequence[str]) -> Scenario:
    scenario = load_scenario(name)
    if overrides:
        scenario = apply_overrides(scenario, overrides)
    return scenario


def _parse_theta_range(raw: str) -> tuple[float, float, float]:
    parts = raw.split(":")
    if len(parts) != 3:
        raise ValidationError("theta-range", "expected start:end:step")
    try:
        return float(parts[0]), float(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ValidationError("theta-range", f"not numeric: {raw!r}") from exc


def _parse_protocol(name: str) -> ProtocolKind:
    try:
        return ProtocolKind(name.strip().lower())
    except ValueError as exc:
        valid = ", ".join(k.value for k in ProtocolKind)
        raise ValidationError("protocol", f"unknown protocol {name!r} (choose from {valid})") from exc


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _cmd_point(args: argparse.Namespace) -> int:
    scenario = _load_with_overrides(args.scenario, args.set or [])
    result = evaluate_point(scenario, args.theta)
    stream, close = _open_out(args.out)
    try:
        if args.format == "json":
            json.dump(_point_json(result), stream, indent=2)
            stream.write("\n")
        else:
            stream.write(_point_report(result))
    finally:
        if close:
            stream.close()
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    start, end, step = _parse_theta_range(args.theta_range)
    names = tuple(s.strip() for s in args.scenarios.split(",") if s.strip())
    spec = SweepSpec(
        theta_start_deg=start,
        theta_end_deg=end,
        theta_step_deg=step,
        scenarios=names,
    )
    scenarios = {name: _load_with_overrides(name, args.set or []) for name in names}
    table = run_sweep(spec, scenarios)
    stream, close = _open_out(args.out)
    try:
        if args.format == "json":
            json.dump(table_to_json(table), stream, indent=2)
            stream.write("\n")
        else:
            write_csv(table, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


def _series_from_csv(path: str, metric: Metric, pair) -> tuple[list[float], list[float], list[float], str]:
    """Read one protocol pair's curves back out of a sweep CSV."""
    import csv as _csv

    columns = {
        Metric.QBER: (f"qber_{pair[0].value}", f"qber_{pair[1].value}"),
        Metric.KEYRATE: (f"rate_{pair[0].value}", f"rate_{pair[1].value}"),
    }[metric]
    thetas: list[float] = []
    first: list[float] = []
    second: list[float] = []
    scenario_seen: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = _csv.DictReader(fh)
        header = reader.fieldnames or []
        for needed in ("scenario", "theta_deg") + columns:
            if needed not in header:
                raise ValidationError("input", f"missing column '{needed}' in {path}")
        for row in reader:
            a, b = float(row[columns[0]]), float(row[columns[1]])
            if math.isnan(a) or math.isnan(b):
                continue
            scenario_seen.add(row["scenario"])
            thetas.append(float(row["theta_deg"]))
            first.append(a)
            second.append(b)
    if len(scenario_seen) != 1:
        raise ValidationError(
            "input", f"crossover needs a single-scenario table, found {len(scenario_seen)}"
        )
    if len(thetas) < 2:
        raise ValidationError("input", "need at least two evaluated rows")
    return thetas, first, second, scenario_seen.pop()


def _cmd_crossover(args: argparse.Namespace) -> int:
    pair_names = [p.strip() for p in args.pair.split(",")]
    if len(pair_names) != 2:
        raise ValidationError("pair", "expected two protocols, e.g. bb84,b92")
    pair = (_parse_protocol(pair_names[0]), _parse_protocol(pair_names[1]))
    metric = Metric(args.metric)
    if args.input is not None:
        thetas, first, second, scenario_name = _series_from_csv(args.input, metric, pair)
        angle = crossover_from_series(thetas, first, second, metric,
                                      qber_gap_threshold=args.gap_threshold)
        profile = [
            (t, a, b, abs(a - b) / max(a, b) if max(a, b) > 0 else 0.0)
            for t, a, b in zip(thetas, first, second)
        ]
    else:
        start, end, step = _parse_theta_range(args.theta_range)
        spec = SweepSpec(
            theta_start_deg=start, theta_end_deg=end, theta_step_deg=step,
            scenarios=(args.scenario,),
        )
        scenario = _load_with_overrides(args.scenario, args.set or [])
        table = run_sweep(spec, {args.scenario: scenario})
        angle = find_crossover(table, metric, pair, qber_gap_threshold=args.gap_threshold)
        profile = gap_profile(table, metric, pair)
        scenario_name = args.scenario
    stream, close = _open_out(args.out)
    try:
        stream.write(f"scenario      {scenario_name}\n")
        stream.write(f"metric        {metric.value}\n")
        stream.write(f"pair          {pair[0].value},{pair[1].value}\n")
        if metric is Metric.QBER:
            stream.write(f"gap_threshold {_fmt(args.gap_threshold)}\n")
        stream.write(f"crossover_deg {_fmt(angle) if angle is not None else 'none'}\n")
        stream.write("theta_deg,first,second,relative_gap\n")
        for theta, a, b, gap in profile:
            stream.write(f"{_fmt(theta)},{_fmt(a)},{_fmt(b)},{_fmt(gap)}\n")
    finally:
        if close:
            stream.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdlink",
        description=(
            "Link-budget simulator for satellite-ground QKD: atmospheric "
            "transmittance, QBER and secure keyrate versus zenith angle for "
            "BB84, B92, BBM92 and E91."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common_scenarios = ", ".join(NAMED_SCENARIOS)

    point = sub.add_parser("point", help="evaluate one scenario at one zenith angle")
    point.add_argument("--scenario", required=True,
                       help=f"scenario name ({common_scenarios}) or JSON file")
    point.add_argument("--theta", type=float, required=True, help="zenith angle in degrees")
    point.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one scenario parameter (repeatable)")
    point.add_argument("--format", choices=("text", "json"), default="text")
    point.add_argument("--out", default=None, help="output path (default stdout)")
    point.set_defaults(func=_cmd_point)

    sweep = sub.add_parser("sweep", help="sweep zenith angles and emit a table")
    sweep.add_argument("--scenarios", default="uplink-night,downlink-day,downlink-night",
                       help="comma-separated scenario names or files")
    sweep.add_argument("--theta-range", default="0:85:1", metavar="START:END:STEP",
                       help="zenith sweep in degrees (default 0:85:1)")
    sweep.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one parameter in every swept scenario")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument("--out", default=None, help="output path (default stdout)")
    sweep.set_defaults(func=_cmd_sweep)

    crossover = sub.add_parser("crossover", help="locate a protocol crossover angle")
    crossover.add_argument("--scenario", default="downlink-night")
    crossover.add_argument("--metric", choices=tuple(m.value for m in Metric), default="keyrate")
    crossover.add_argument("--pair", default="bb84,b92", help="protocol pair, e.g. bb84,b92")
    crossover.add_argument("--theta-range", default="0:85:1", metavar="START:END:STEP")
    crossover.add_argument("--gap-threshold", type=float, default=0.05,
                           help="relative QBER gap that counts as divergence")
    crossover.add_argument("--input", default=None, metavar="SWEEP_CSV",
                           help="analyze a previously saved single-scenario sweep "
                                "instead of running one")
    crossover.add_argument("--set", action="append", metavar="KEY=VALUE")
    crossover.add_argument("--out", default=None)
    crossover.set_defaults(func=_cmd_crossover)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which matches the
        # validation exit code; version/help exit 0.
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValidationError, ScenarioParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QkdLinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
