"""Scenario definitions: every input parameter, validation, JSON I/O.

A scenario is the full description of one link experiment: direction,
day or night, geometry, optics, detector, atmosphere, environment and
protocol parameters. Three named defaults ship with the package
(``uplink-night``, ``downlink-day``, ``downlink-night``); scenario files
start from one of them and override individual fields.

All angles in files are degrees, all other fields carry their unit in
the name. Scenario values are immutable after load and safe to share
across parallel workers.
"""
from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence, Tuple

from .errors import ScenarioParseError, ValidationError

#: Zenith angles above this are refused: the flat-earth secant path
#: diverges toward 90 degrees. The boundary itself is accepted so sweeps
#: over [0, 85] include their last sample.
MAX_ZENITH_DEG = 85.0

UPLINK = "uplink"
DOWNLINK = "downlink"

SCENARIO_DIR_ENV = "QKDLINK_SCENARIO_DIR"


@dataclass(frozen=True)
class LinkGeometry:
    direction: str = DOWNLINK
    ground_altitude_m: float = 0.0
    satellite_altitude_m: float = 500e3
    atmospheric_thickness_m: float = 20e3
    zenith_angle_deg: float = 0.0

    @property
    def zenith_rad(self) -> float:
        return math.radians(self.zenith_angle_deg)


@dataclass(frozen=True)
class OpticsParams:
    transmitter_diameter_m: float = 0.5
    receiver_diameter_m: float = 1.0
    beam_divergence_rad: float = 2.5e-6  # full angle
    transmitter_beam_radius_m: float = 0.25
    transmitter_efficiency: float = 0.9
    receiver_efficiency: float = 0.9
    wavelength_nm: float = 800.0
    telescope_radius_m: float = 0.5  # receiving telescope, feeds stray-light area

    @property
    def wavelength_m(self) -> float:
        return self.wavelength_nm * 1e-9

    @property
    def wavenumber(self) -> float:
        """Optical wavenumber k = 2 pi / lambda in rad/m."""
        return 2.0 * math.pi / self.wavelength_m


@dataclass(frozen=True)
class DetectorParams:
    detector_efficiency: float = 0.65
    dark_prob_per_window: float = 4e-8
    time_window_s: float = 0.5e-9
    fov_sr: float = 1e-8
    filter_width_nm: float = 1.0
    threshold_prob: float = 1e-3


@dataclass(frozen=True)
class AtmosphereParams:
    # Ground turbulence strength for the Hufnagel-Valley profile. The
    # night value 1.70e-14 makes the [0, H] integral average equal
    # 1.12e-16 m^(-2/3), the night figure the defaults are calibrated
    # to; the sometimes-quoted night strength 1.10e-14 would yield
    # 8.2e-17 instead. (A tabulated night average of 1.2e-16 also
    # circulates; the integral-derived 1.12e-16 is used.)
    hv_ground_strength: float = 1.70e-14  # m^(-2/3)
    hv_wind_mps: float = 21.0
    ground_visibility_km: float = 10.0
    beam_wander_cr: float = 2.0  # scaling constant, allowed range [1, 2*pi]
    slant_correct_scattering: bool = True
    scattering_floor_m: float = 1.0  # avoids the V(0)=0 singularity
    rytov_path: str = "layer"  # "layer": t*sec(theta); "full": whole slant


@dataclass(frozen=True)
class EnvironmentParams:
    sky_brightness_w_m2_sr_nm: float = 1.5e-6
    solar_irradiance_phot_s_nm_m2: float = 4.610e18
    earth_albedo: float = 0.300
    moon_albedo: float = 0.136
    moon_radius_m: float = 1.737e6
    earth_moon_distance_m: float = 3.6e8
    # Background light passes the same receiving optics as the signal;
    # switch off to keep the raw stray count.
    stray_apply_receiver_efficiency: bool = True


@dataclass(frozen=True)
class ProtocolParams:
    mean_photon_number: float = 0.1  # weak coherent source operating point
    intrinsic_error: float = 0.02
    ec_factor: float = 1.22
    # Optional (qber, f) knots; when present they replace the constant.
    ec_factor_table: Optional[Tuple[Tuple[float, float], ...]] = None
    entangled_rate_mode: str = "corrected"  # or "verbatim"
    double_blinding: bool = False
    entangled_split_fraction: float = 0.5  # source position along the pair link


@dataclass(frozen=True)
class Scenario:
    name: str
    daytime: bool
    geometry: LinkGeometry = field(default_factory=LinkGeometry)
    optics: OpticsParams = field(default_factory=OpticsParams)
    detector: DetectorParams = field(default_factory=DetectorParams)
    atmosphere: AtmosphereParams = field(default_factory=AtmosphereParams)
    environment: EnvironmentParams = field(default_factory=EnvironmentParams)
    protocol: ProtocolParams = field(default_factory=ProtocolParams)

    def sections(self) -> Iterator[Tuple[str, Any]]:
        yield "geometry", self.geometry
        yield "optics", self.optics
        yield "detector", self.detector
        yield "atmosphere", self.atmosphere
        yield "environment", self.environment
        yield "protocol", self.protocol


# ---------------------------------------------------------------------------
# Named defaults
# ---------------------------------------------------------------------------

# Shared numbers: wavelength 800 nm, satellite at 500 km, 20 km
# atmosphere, dark probability 4e-8 per window, 0.5 ns windows,
# intrinsic error 2%. Optics, detector efficiency and the mean photon
# number are not fixed by the parameter tables and are model choices.


def _downlink_optics() -> OpticsParams:
    # Narrow (near diffraction limited) satellite transmitter and a 1 m
    # ground telescope; chosen so the signal dominates sky noise at
    # small zenith angles.
    return OpticsParams(
        transmitter_diameter_m=0.5,
        receiver_diameter_m=1.0,
        beam_divergence_rad=2.5e-6,
        transmitter_beam_radius_m=0.25,
        transmitter_efficiency=0.9,
        receiver_efficiency=0.9,
        wavelength_nm=800.0,
        telescope_radius_m=0.5,
    )


def _uplink_optics() -> OpticsParams:
    # Ground transmitter beams widen beyond the diffraction limit once
    # they cross the turbulent layer (lambda/r0 is about 9 urad for the
    # night profile at 800 nm), hence the larger divergence.
    return OpticsParams(
        transmitter_diameter_m=0.2,
        receiver_diameter_m=0.3,
        beam_divergence_rad=12e-6,
        transmitter_beam_radius_m=0.1,
        transmitter_efficiency=0.9,
        receiver_efficiency=0.9,
        wavelength_nm=800.0,
        telescope_radius_m=0.15,
    )


def _named_defaults() -> dict[str, Scenario]:
    uplink_night = Scenario(
        name="uplink-night",
        daytime=False,
        geometry=LinkGeometry(direction=UPLINK),
        optics=_uplink_optics(),
        detector=DetectorParams(fov_sr=(30e-6) ** 2, filter_width_nm=1.0),
        atmosphere=AtmosphereParams(hv_ground_strength=1.70e-14, ground_visibility_km=10.0),
        environment=EnvironmentParams(sky_brightness_w_m2_sr_nm=1.5e-6),
    )
    downlink_night = Scenario(
        name="downlink-night",
        daytime=False,
        geometry=LinkGeometry(direction=DOWNLINK),
        optics=_downlink_optics(),
        detector=DetectorParams(fov_sr=(100e-6) ** 2, filter_width_nm=1.0),
        atmosphere=AtmosphereParams(hv_ground_strength=1.70e-14, ground_visibility_km=10.0),
        environment=EnvironmentParams(sky_brightness_w_m2_sr_nm=1.5e-6),
    )
    downlink_day = Scenario(
        name="downlink-day",
        daytime=True,
        geometry=LinkGeometry(direction=DOWNLINK),
        optics=_downlink_optics(),
        detector=DetectorParams(fov_sr=(10e-6) ** 2, filter_width_nm=0.2),
        atmosphere=AtmosphereParams(hv_ground_strength=2.75e-14, ground_visibility_km=23.0),
        environment=EnvironmentParams(sky_brightness_w_m2_sr_nm=1.5e-3),
    )
    return {
        uplink_night.name: uplink_night,
        downlink_night.name: downlink_night,
        downlink_day.name: downlink_day,
    }


NAMED_SCENARIOS = tuple(_named_defaults())


def named_default(name: str) -> Scenario:
    """Return a validated copy of one of the shipped default scenarios."""
    defaults = _named_defaults()
    key = name.strip().lower().replace("_", "-")
    if key not in defaults:
        raise ValidationError("scenario", f"unknown scenario {name!r} (choose from {', '.join(defaults)})")
    scenario = defaults[key]
    validate(scenario)
    return scenario


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _require(cond: bool, fieldname: str, message: str) -> None:
    if not cond:
        raise ValidationError(fieldname, message)


def validate(s: Scenario) -> Scenario:
    """Check every invariant; returns the scenario when it passes."""
    g, o, d, a, e, p = s.geometry, s.optics, s.detector, s.atmosphere, s.environment, s.protocol

    _require(g.direction in (UPLINK, DOWNLINK), "geometry.direction", f"must be '{UPLINK}' or '{DOWNLINK}'")
    _require(not (g.direction == UPLINK and s.daytime), "daytime",
             "day-time uplink unsupported (background light makes the link unusable)")
    _require(0.0 <= g.zenith_angle_deg <= MAX_ZENITH_DEG, "geometry.zenith_angle_deg",
             f"zenith beyond max_zenith ({MAX_ZENITH_DEG} deg)")
    _require(g.ground_altitude_m >= 0.0, "geometry.ground_altitude_m", "must be >= 0")
    _require(g.atmospheric_thickness_m > 0.0, "geometry.atmospheric_thickness_m", "must be > 0")
    _require(g.ground_altitude_m < g.atmospheric_thickness_m, "geometry.ground_altitude_m",
             "the ground station must sit inside the atmospheric layer")
    # also keeps the turbulent-layer slant shorter than the full path
    _require(g.satellite_altitude_m > g.atmospheric_thickness_m + g.ground_altitude_m,
             "geometry.satellite_altitude_m", "the satellite must clear the atmosphere")

    for fname in ("transmitter_diameter_m", "receiver_diameter_m", "transmitter_beam_radius_m",
                  "telescope_radius_m"):
        _require(getattr(o, fname) > 0.0, f"optics.{fname}", "must be > 0")
    _require(o.beam_divergence_rad >= 0.0, "optics.beam_divergence_rad", "must be >= 0")
    _require(0.0 < o.transmitter_efficiency <= 1.0, "optics.transmitter_efficiency", "must be in (0, 1]")
    _require(0.0 < o.receiver_efficiency <= 1.0, "optics.receiver_efficiency", "must be in (0, 1]")
    _require(300.0 <= o.wavelength_nm <= 2000.0, "optics.wavelength_nm",
             "outside the 300-2000 nm sanity band")

    _require(0.0 < d.detector_efficiency <= 1.0, "detector.detector_efficiency", "must be in (0, 1]")
    _require(0.0 < d.dark_prob_per_window < 1.0, "detector.dark_prob_per_window", "must be in (0, 1)")
    _require(d.dark_prob_per_window < 0.25, "detector.dark_prob_per_window",
             "4 detectors would exceed unit click probability")
    _require(d.time_window_s > 0.0, "detector.time_window_s", "must be > 0")
    _require(d.fov_sr > 0.0, "detector.fov_sr", "must be > 0")
    _require(d.filter_width_nm > 0.0, "detector.filter_width_nm", "must be > 0")
    # Above exp(-3.3**2 / 5.77**2) = 0.721 the loss bracket changes
    # sign and the scintillation loss would become a gain.
    _require(0.0 < d.threshold_prob < 0.721, "detector.threshold_prob", "must be in (0, 0.721)")

    _require(a.hv_ground_strength > 0.0, "atmosphere.hv_ground_strength", "must be > 0")
    _require(a.hv_wind_mps > 0.0, "atmosphere.hv_wind_mps", "must be > 0")
    _require(a.ground_visibility_km > 0.0, "atmosphere.ground_visibility_km", "must be > 0")
    _require(1.0 <= a.beam_wander_cr <= 2.0 * math.pi, "atmosphere.beam_wander_cr",
             "must be in [1, 2*pi]")
    _require(a.scattering_floor_m > 0.0, "atmosphere.scattering_floor_m", "must be > 0")
    _require(a.rytov_path in ("layer", "full"), "atmosphere.rytov_path", "must be 'layer' or 'full'")

    _require(0.0 <= e.earth_albedo <= 1.0, "environment.earth_albedo", "must be in [0, 1]")
    _require(0.0 <= e.moon_albedo <= 1.0, "environment.moon_albedo", "must be in [0, 1]")
    for fname in ("sky_brightness_w_m2_sr_nm", "solar_irradiance_phot_s_nm_m2",
                  "moon_radius_m", "earth_moon_distance_m"):
        _require(getattr(e, fname) > 0.0, f"environment.{fname}", "must be > 0")

    _require(0.0 < p.mean_photon_number <= 1.0, "protocol.mean_photon_number", "must be in (0, 1]")
    _require(0.0 <= p.intrinsic_error < 0.5, "protocol.intrinsic_error", "must be in [0, 0.5)")
    _require(p.ec_factor >= 1.0, "protocol.ec_factor", "must be >= 1")
    if p.ec_factor_table is not None:
        _require(len(p.ec_factor_table) > 0, "protocol.ec_factor_table", "must not be empty")
        last = -math.inf
        for q, f in p.ec_factor_table:
            _require(q > last, "protocol.ec_factor_table", "qber knots must be strictly increasing")
            _require(f >= 1.0, "protocol.ec_factor_table", "every f must be >= 1")
            last = q
    _require(p.entangled_rate_mode in ("corrected", "verbatim"), "protocol.entangled_rate_mode",
             "must be 'corrected' or 'verbatim'")
    _require(0.0 < p.entangled_split_fraction < 1.0, "protocol.entangled_split_fraction",
             "must be in (0, 1)")
    return s


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------

_SECTION_TYPES = {
    "geometry": LinkGeometry,
    "optics": OpticsParams,
    "detector": DetectorParams,
    "atmosphere": AtmosphereParams,
    "environment": EnvironmentParams,
    "protocol": ProtocolParams,
}


def scenario_to_dict(s: Scenario) -> dict:
    out: dict[str, Any] = {"name": s.name, "daytime": s.daytime}
    for section, value in s.sections():
        d = dataclasses.asdict(value)
        if section == "protocol" and d.get("ec_factor_table") is not None:
            d["ec_factor_table"] = [list(pair) for pair in d["ec_factor_table"]]
        out[section] = d
    return out


def _coerce(section: str, cls: type, data: dict) -> Any:
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key not in known:
            raise ScenarioParseError(f"unknown field '{section}.{key}'")
        if key == "ec_factor_table" and value is not None:
            try:
                value = tuple((float(q), float(f)) for q, f in value)
            except (TypeError, ValueError) as exc:
                raise ScenarioParseError(f"'{section}.{key}' must be a list of [qber, f] pairs") from exc
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ScenarioParseError(f"bad section '{section}': {exc}") from exc


def scenario_from_dict(data: dict, base: Optional[Scenario] = None) -> Scenario:
    """Build a scenario from a dict, filling gaps from ``base``.

    When ``base`` is None the dict must carry a ``scenario`` key naming
    the default to start from.
    """
    data = dict(data)
    base_name = data.pop("scenario", None)
    if base is None:
        if base_name is None:
            raise ScenarioParseError("missing 'scenario' key naming the base defaults")
        base = named_default(str(base_name))
    name = data.pop("name", base.name)
    daytime = data.pop("daytime", base.daytime)
    sections: dict[str, Any] = {}
    for section, cls in _SECTION_TYPES.items():
        overrides = data.pop(section, None)
        current = dataclasses.asdict(getattr(base, section))
        if overrides is not None:
            if not isinstance(overrides, dict):
                raise ScenarioParseError(f"section '{section}' must be an object")
            current.update(overrides)
        if section == "protocol" and current.get("ec_factor_table") is not None:
            current["ec_factor_table"] = tuple(tuple(p) for p in current["ec_factor_table"])
        sections[section] = _coerce(section, cls, current)
    if data:
        raise ScenarioParseError(f"unknown top-level keys: {', '.join(sorted(data))}")
    scenario = Scenario(name=str(name), daytime=bool(daytime), **sections)
    return validate(scenario)


def resolve_scenario_path(name_or_path: str) -> Optional[Path]:
    """Find a scenario file: literal path first, then $QKDLINK_SCENARIO_DIR."""
    p = Path(name_or_path)
    if p.is_file():
        return p
    env_dir = os.environ.get(SCENARIO_DIR_ENV)
    if env_dir:
        for candidate in (Path(env_dir) / name_or_path, Path(env_dir) / f"{name_or_path}.json"):
            if candidate.is_file():
                return candidate
    return None


def load_scenario(name_or_path: str) -> Scenario:
    """Load a scenario by default name or from a JSON file.

    Lookup order: shipped default names, a literal file path, then
    ``$QKDLINK_SCENARIO_DIR/<name>[.json]``.
    """
    key = name_or_path.strip().lower().replace("_", "-")
    if key in _named_defaults():
        return named_default(key)
    path = resolve_scenario_path(name_or_path)
    if path is None:
        raise ScenarioParseError(
            f"no scenario named {name_or_path!r}: not a shipped default, not a file, "
            f"not found under ${SCENARIO_DIR_ENV}"
        )
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ScenarioParseError(f"{path}: top level must be an object")
    return scenario_from_dict(data)


def save_scenario(s: Scenario, path: str | Path) -> None:
    """Write the full scenario as canonical JSON (sorted keys)."""
    payload = scenario_to_dict(s)
    payload["scenario"] = s.name if s.name in NAMED_SCENARIOS else "downlink-night"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Field overrides (CLI --set)
# ---------------------------------------------------------------------------

#: Short spellings accepted by ``--set`` beside full field names.
FIELD_ALIASES = {
    "mu": "protocol.mean_photon_number",
    "c": "protocol.intrinsic_error",
    "f_ec": "protocol.ec_factor",
    "d": "detector.dark_prob_per_window",
    "eta_d": "detector.detector_efficiency",
    "eta_t": "optics.transmitter_efficiency",
    "eta_r": "optics.receiver_efficiency",
    "p_thr": "detector.threshold_prob",
    "v0": "atmosphere.ground_visibility_km",
    "cr": "atmosphere.beam_wander_cr",
    "theta_div": "optics.beam_divergence_rad",
    "d_t": "optics.transmitter_diameter_m",
    "d_r": "optics.receiver_diameter_m",
    "w0": "optics.transmitter_beam_radius_m",
    "a": "optics.telescope_radius_m",
    "lambda_nm": "optics.wavelength_nm",
    "h": "geometry.satellite_altitude_m",
    "t": "geometry.atmospheric_thickness_m",
    "hv_a": "atmosphere.hv_ground_strength",
    "hv_v": "atmosphere.hv_wind_mps",
    "b_f": "detector.filter_width_nm",
    "fov": "detector.fov_sr",
    "dt": "detector.time_window_s",
}


def _parse_value(current: Any, raw: str) -> Any:
    if isinstance(current, bool):
        lowered = raw.strip().lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, int):
        return int(raw)
    return raw


def _locate_field(s: Scenario, key: str) -> Tuple[str, str]:
    key = key.strip()
    target = FIELD_ALIASES.get(key.lower(), key)
    if "." in target:
        section, fieldname = target.split(".", 1)
        if section not in _SECTION_TYPES:
            raise ValidationError(key, f"unknown section '{section}'")
        if fieldname not in {f.name for f in dataclasses.fields(_SECTION_TYPES[section])}:
            raise ValidationError(key, f"unknown field '{target}'")
        return section, fieldname
    matches = [
        (section, fieldname)
        for section, cls in _SECTION_TYPES.items()
        for fieldname in (f.name for f in dataclasses.fields(cls))
        if fieldname == target
    ]
    if not matches:
        raise ValidationError(key, "unknown parameter")
    if len(matches) > 1:
        options = ", ".join(f"{s_}.{f_}" for s_, f_ in matches)
        raise ValidationError(key, f"ambiguous parameter, qualify as one of: {options}")
    return matches[0]


def apply_overrides(s: Scenario, assignments: Sequence[str]) -> Scenario:
    """Apply ``key=value`` strings to a scenario and re-validate.

    Keys are full field names, ``section.field`` paths, or one of the
    aliases in :data:`FIELD_ALIASES`. Each override touches exactly the
    named parameter.
    """
    for item in assignments:
        if "=" not in item:
            raise ValidationError(item, "override must look like key=value")
        key, raw = item.split("=", 1)
        section, fieldname = _locate_field(s, key)
        section_obj = getattr(s, section)
        current = getattr(section_obj, fieldname)
        try:
            value = _parse_value(current, raw)
        except ValueError as exc:
            raise ValidationError(f"{section}.{fieldname}", str(exc)) from exc
        s = dataclasses.replace(s, **{section: dataclasses.replace(section_obj, **{fieldname: value})})
    return validate(s)
