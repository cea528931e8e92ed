"""Environmental (stray) photon counts per detection window.

Night uplink noise is moonshine: sunlight reflected by the moon and
then by the earth into the satellite receiver's field of view. Downlink
noise is sky radiance collected by the ground telescope. Counts convert
to window-occupancy probabilities through a Poisson bridge,
p = 1 - exp(-N), which reduces to N for the small counts typical here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import PLANCK_CONSTANT, SPEED_OF_LIGHT
from .config import UPLINK, Scenario


@dataclass(frozen=True)
class StrayCountInputs:
    fov_sr: float
    telescope_radius_m: float
    filter_width_nm: float
    window_s: float
    wavelength_nm: float
    sky_brightness_w_m2_sr_nm: float = 0.0
    solar_irradiance_phot_s_nm_m2: float = 0.0
    earth_albedo: float = 0.0
    moon_albedo: float = 0.0
    moon_radius_m: float = 0.0
    earth_moon_distance_m: float = 1.0


def from_scenario(scenario: Scenario) -> StrayCountInputs:
    d = scenario.detector
    o = scenario.optics
    e = scenario.environment
    return StrayCountInputs(
        fov_sr=d.fov_sr,
        telescope_radius_m=o.telescope_radius_m,
        filter_width_nm=d.filter_width_nm,
        window_s=d.time_window_s,
        wavelength_nm=o.wavelength_nm,
        sky_brightness_w_m2_sr_nm=e.sky_brightness_w_m2_sr_nm,
        solar_irradiance_phot_s_nm_m2=e.solar_irradiance_phot_s_nm_m2,
        earth_albedo=e.earth_albedo,
        moon_albedo=e.moon_albedo,
        moon_radius_m=e.moon_radius_m,
        earth_moon_distance_m=e.earth_moon_distance_m,
    )


def stray_uplink_night(inp: StrayCountInputs) -> float:
    """Moonshine photons per window reaching the satellite receiver.

    N = A_E * A_M * R_M^2 * a^2 * (fov / d_EM^2) * B_f * dt * H_sun;
    linear in every factor.
    """
    return (
        inp.earth_albedo
        * inp.moon_albedo
        * inp.moon_radius_m**2
        * inp.telescope_radius_m**2
        * inp.fov_sr
        / inp.earth_moon_distance_m**2
        * inp.filter_width_nm
        * inp.window_s
        * inp.solar_irradiance_phot_s_nm_m2
    )


def background_power_downlink(inp: StrayCountInputs) -> float:
    """Sky-background power P_b = H_b * fov * pi * a^2 * B_f in watts."""
    return (
        inp.sky_brightness_w_m2_sr_nm
        * inp.fov_sr
        * math.pi
        * inp.telescope_radius_m**2
        * inp.filter_width_nm
    )


def photon_energy_j(wavelength_nm: float) -> float:
    return PLANCK_CONSTANT * SPEED_OF_LIGHT / (wavelength_nm * 1e-9)


def stray_downlink(inp: StrayCountInputs) -> float:
    """Sky-background photons per window: P_b * dt / (h * nu)."""
    return background_power_downlink(inp) * inp.window_s / photon_energy_j(inp.wavelength_nm)


def stray_count(scenario: Scenario) -> float:
    """Raw stray photons per window for the scenario's receiving station."""
    inp = from_scenario(scenario)
    if scenario.geometry.direction == UPLINK:
        return stray_uplink_night(inp)
    return stray_downlink(inp)


def stray_probability(scenario: Scenario, count: float | None = None) -> float:
    """Probability of at least one stray photon in a window.

    Applies the receiver optics efficiency to the count (background
    passes the same optics as the signal) unless the scenario disables
    it, then the Poisson bridge 1 - exp(-N).
    """
    n = stray_count(scenario) if count is None else count
    if scenario.environment.stray_apply_receiver_efficiency:
        n = n * scenario.optics.receiver_efficiency
    return -math.expm1(-n)
