"""Link geometry and the transmittance chain.

The total transmittance factorizes into independent mechanisms:

    eta_T = eta_geo * eta_t * eta_r * eta_scatt * eta_turb * eta_bw

Geometric capture and the optics efficiencies live here; scattering and
turbulence factors come from their modules. Beam wander applies to the
uplink only: the downlink beam meets turbulence when it is already
expanded, so its centroid wander is negligible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import scattering, turbulence
from .config import MAX_ZENITH_DEG, UPLINK, LinkGeometry, OpticsParams, Scenario
from .errors import DomainError
from .turbulence import BeamWanderInputs, TurbulenceProfile, WaveModel

_PRODUCT_RTOL = 1e-12


@dataclass(frozen=True)
class TransmittanceBreakdown:
    """Per-mechanism efficiencies and their product."""

    eta_geo: float
    eta_scatt: float
    eta_turb: float
    eta_bw: float
    eta_optics: float
    eta_total: float
    slant_distance_m: float

    def __post_init__(self):
        for name in ("eta_geo", "eta_scatt", "eta_turb", "eta_bw", "eta_optics"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} = {value} is not a fraction")
        product = (
            self.eta_geo * self.eta_scatt * self.eta_turb * self.eta_bw * self.eta_optics
        )
        if abs(product - self.eta_total) > _PRODUCT_RTOL * max(product, self.eta_total):
            raise DomainError("eta_total does not equal the factor product")


@dataclass(frozen=True)
class TurbulenceDetail:
    """Intermediate turbulence quantities, kept for report output."""

    cn2_avg: float
    cn2_integral: float
    fried_r0_m: float
    rytov_plane: float
    rytov_used: float
    aperture_d: float
    scint_index: float
    a_sci_db: float
    wander_variance_m2: float
    pointing_variance_m2: float
    wander_scint: float
    a_bw_db: float
    wave: WaveModel


def slant_distance(geom: LinkGeometry, zenith_rad: float | None = None) -> float:
    """Slant distance L = (H - h0) / cos(zenith) in metres.

    Flat-earth secant path, valid to MAX_ZENITH_DEG and refused beyond.
    """
    theta = geom.zenith_rad if zenith_rad is None else zenith_rad
    if not 0.0 <= math.degrees(theta) <= MAX_ZENITH_DEG:
        raise DomainError(
            f"zenith {math.degrees(theta):.3f} deg outside [0, {MAX_ZENITH_DEG}] deg"
        )
    return (geom.satellite_altitude_m - geom.ground_altitude_m) / math.cos(theta)


def eta_geo(optics: OpticsParams, slant_m: float) -> float:
    """Geometric capture d_r^2 / (d_t + L*theta_div)^2, clamped to 1.

    The clamp keeps the factor a proper efficiency when the receiver
    out-sizes the diffracted footprint at short range.
    """
    if slant_m <= 0.0:
        raise DomainError("slant distance must be > 0")
    footprint = optics.transmitter_diameter_m + slant_m * optics.beam_divergence_rad
    return min(1.0, (optics.receiver_diameter_m / footprint) ** 2)


def receiver_beam_radius(optics: OpticsParams, slant_m: float) -> float:
    """Long-term beam radius at the receiver: half the geometric
    footprint used by :func:`eta_geo`."""
    return 0.5 * (optics.transmitter_diameter_m + slant_m * optics.beam_divergence_rad)


def transmittance_chain(
    scenario: Scenario, theta_deg: float
) -> tuple[TransmittanceBreakdown, TurbulenceDetail]:
    """Evaluate every transmittance factor for one zenith angle.

    Returns the breakdown plus the turbulence intermediates so callers
    can audit r0, Rytov variance, scintillation indices and dB losses.
    """
    geom = scenario.geometry
    optics = scenario.optics
    atmo = scenario.atmosphere
    theta = math.radians(theta_deg)
    length = slant_distance(geom, theta)
    sec = 1.0 / math.cos(theta)

    geo = eta_geo(optics, length)
    eta_optics = optics.transmitter_efficiency * optics.receiver_efficiency

    model = scattering.ScatteringModel(
        wavelength_nm=optics.wavelength_nm,
        ground_visibility_km=atmo.ground_visibility_km,
        slant_correct=atmo.slant_correct_scattering,
        floor_m=atmo.scattering_floor_m,
    )
    if geom.direction == UPLINK:
        h_tx, h_rx = geom.ground_altitude_m, geom.satellite_altitude_m
    else:
        h_tx, h_rx = geom.satellite_altitude_m, geom.ground_altitude_m
    lo_km, hi_km = scattering.scattering_band_km(
        h_tx, h_rx, geom.atmospheric_thickness_m, atmo.scattering_floor_m
    )
    scatt = scattering.eta_scatt(model, lo_km, hi_km, theta)

    profile = TurbulenceProfile(hv_a=atmo.hv_ground_strength, hv_v=atmo.hv_wind_mps)
    cn2_avg = turbulence.cn2_average(
        profile, geom.satellite_altitude_m, geom.atmospheric_thickness_m
    )
    cn2_integral = turbulence.cn2_path_integral(
        profile, geom.ground_altitude_m, geom.satellite_altitude_m
    )
    if atmo.rytov_path == "layer":
        turb_path = geom.atmospheric_thickness_m * sec
    else:
        turb_path = length
    k = optics.wavenumber
    rytov_plane = turbulence.rytov_variance(cn2_avg, k, turb_path, WaveModel.PLANE)
    wave = WaveModel.SPHERICAL if geom.direction == UPLINK else WaveModel.PLANE
    rytov_used = rytov_plane if wave is WaveModel.PLANE else 0.4 * rytov_plane
    d = turbulence.aperture_parameter(k, optics.receiver_diameter_m, length)
    sigma_i2 = turbulence.scintillation_index(rytov_used, d, wave)
    a_sci = turbulence.loss_db(sigma_i2, scenario.detector.threshold_prob)
    eta_turb = turbulence.eta_from_db(a_sci)

    if geom.direction == UPLINK:
        r0 = turbulence.fried_parameter(cn2_integral, theta, k)
        w_recv = receiver_beam_radius(optics, length)
        inputs = BeamWanderInputs(
            satellite_altitude_m=geom.satellite_altitude_m,
            ground_altitude_m=geom.ground_altitude_m,
            zenith_rad=theta,
            w0_m=optics.transmitter_beam_radius_m,
            r0_m=r0,
            cr=atmo.beam_wander_cr,
            w_recv_m=w_recv,
            l_m=length,
        )
        rc2 = turbulence.beam_wander_variance(inputs, optics.wavelength_m)
        pe2 = turbulence.pointing_error_variance(
            rc2, optics.transmitter_beam_radius_m, r0, atmo.beam_wander_cr
        )
        wander_scint = turbulence.beam_wander_scintillation(inputs, pe2)
        a_bw = turbulence.loss_db(wander_scint, scenario.detector.threshold_prob)
        eta_bw = turbulence.eta_from_db(a_bw)
    else:
        r0 = turbulence.fried_parameter(cn2_integral, theta, k)
        rc2 = 0.0
        pe2 = 0.0
        wander_scint = 0.0
        a_bw = 0.0
        eta_bw = 1.0

    total = geo * scatt * eta_turb * eta_bw * eta_optics
    breakdown = TransmittanceBreakdown(
        eta_geo=geo,
        eta_scatt=scatt,
        eta_turb=eta_turb,
        eta_bw=eta_bw,
        eta_optics=eta_optics,
        eta_total=total,
        slant_distance_m=length,
    )
    detail = TurbulenceDetail(
        cn2_avg=cn2_avg,
        cn2_integral=cn2_integral,
        fried_r0_m=r0,
        rytov_plane=rytov_plane,
        rytov_used=rytov_used,
        aperture_d=d,
        scint_index=sigma_i2,
        a_sci_db=a_sci,
        wander_variance_m2=rc2,
        pointing_variance_m2=pe2,
        wander_scint=wander_scint,
        a_bw_db=a_bw,
        wave=wave,
    )
    return breakdown, detail


def total_transmittance(scenario: Scenario, theta_deg: float) -> TransmittanceBreakdown:
    """Assemble the full transmittance breakdown at one zenith angle."""
    breakdown, _ = transmittance_chain(scenario, theta_deg)
    return breakdown
