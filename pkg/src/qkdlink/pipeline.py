"""Point evaluation: scenario + zenith angle -> transmittance breakdown,
click/coincidence models, QBER and keyrate for all four protocols.

A :class:`ScenarioContext` caches the zenith-independent quantities
(the two structure-parameter quadratures, the vertical scattering
depth, stray counts, the multiphoton bound) so sweeps pay for each
integral once per scenario.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict

from . import background, keyrate, link, protocols, scattering, turbulence
from .config import MAX_ZENITH_DEG, UPLINK, Scenario
from .errors import DomainError
from .link import TransmittanceBreakdown, TurbulenceDetail
from .protocols import ClickModel, CoincidenceModel, ProtocolKind
from .turbulence import BeamWanderInputs, TurbulenceProfile, WaveModel


@dataclass(frozen=True)
class ProtocolResult:
    qber: float
    rate: float


@dataclass(frozen=True)
class PointResult:
    scenario: str
    theta_deg: float
    breakdown: TransmittanceBreakdown
    turbulence: TurbulenceDetail
    stray_count: float
    p_stray: float
    clicks: ClickModel
    coincidences: CoincidenceModel
    security: keyrate.SecurityTerms
    protocols: Dict[ProtocolKind, ProtocolResult]


@dataclass(frozen=True)
class ScenarioContext:
    scenario: Scenario
    cn2_avg: float
    cn2_integral: float
    vertical_depth: float
    stray_count: float
    p_stray: float
    p_dark: float
    p_prime: float


def build_context(scenario: Scenario) -> ScenarioContext:
    """Precompute every zenith-independent quantity of a scenario."""
    geom = scenario.geometry
    atmo = scenario.atmosphere
    profile = TurbulenceProfile(hv_a=atmo.hv_ground_strength, hv_v=atmo.hv_wind_mps)
    cn2_avg = turbulence.cn2_average(
        profile, geom.satellite_altitude_m, geom.atmospheric_thickness_m
    )
    cn2_integral = turbulence.cn2_path_integral(
        profile, geom.ground_altitude_m, geom.satellite_altitude_m
    )
    model = scattering.ScatteringModel(
        wavelength_nm=scenario.optics.wavelength_nm,
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
    depth = scattering.vertical_optical_depth(model, lo_km, hi_km)
    n_stray = background.stray_count(scenario)
    return ScenarioContext(
        scenario=scenario,
        cn2_avg=cn2_avg,
        cn2_integral=cn2_integral,
        vertical_depth=depth,
        stray_count=n_stray,
        p_stray=background.stray_probability(scenario, n_stray),
        p_dark=protocols.p_dark(scenario.detector.dark_prob_per_window),
        p_prime=keyrate.p_prime(scenario.protocol.mean_photon_number),
    )


def _transmittance(ctx: ScenarioContext, theta_deg: float) -> tuple[TransmittanceBreakdown, TurbulenceDetail]:
    """Mirror of link.transmittance_chain using the cached integrals."""
    scenario = ctx.scenario
    geom = scenario.geometry
    optics = scenario.optics
    atmo = scenario.atmosphere
    if not 0.0 <= theta_deg <= MAX_ZENITH_DEG:
        raise DomainError(f"zenith {theta_deg:.3f} deg outside [0, {MAX_ZENITH_DEG}] deg")
    theta = math.radians(theta_deg)
    length = link.slant_distance(geom, theta)
    sec = 1.0 / math.cos(theta)

    geo = link.eta_geo(optics, length)
    eta_optics = optics.transmitter_efficiency * optics.receiver_efficiency
    tau_opt = ctx.vertical_depth * (sec if atmo.slant_correct_scattering else 1.0)
    scatt = math.exp(-tau_opt)

    turb_path = geom.atmospheric_thickness_m * sec if atmo.rytov_path == "layer" else length
    k = optics.wavenumber
    rytov_plane = turbulence.rytov_variance(ctx.cn2_avg, k, turb_path, WaveModel.PLANE)
    wave = WaveModel.SPHERICAL if geom.direction == UPLINK else WaveModel.PLANE
    rytov_used = rytov_plane if wave is WaveModel.PLANE else 0.4 * rytov_plane
    d = turbulence.aperture_parameter(k, optics.receiver_diameter_m, length)
    sigma_i2 = turbulence.scintillation_index(rytov_used, d, wave)
    a_sci = turbulence.loss_db(sigma_i2, scenario.detector.threshold_prob)
    eta_turb = turbulence.eta_from_db(a_sci)

    r0 = turbulence.fried_parameter(ctx.cn2_integral, theta, k)
    if geom.direction == UPLINK:
        inputs = BeamWanderInputs(
            satellite_altitude_m=geom.satellite_altitude_m,
            ground_altitude_m=geom.ground_altitude_m,
            zenith_rad=theta,
            w0_m=optics.transmitter_beam_radius_m,
            r0_m=r0,
            cr=atmo.beam_wander_cr,
            w_recv_m=link.receiver_beam_radius(optics, length),
            l_m=length,
        )
        rc2 = turbulence.beam_wander_variance(inputs, optics.wavelength_m)
        pe2 = turbulence.pointing_error_variance(
            rc2, optics.transmitter_beam_radius_m, r0, atmo.beam_wander_cr
        )
        wander = turbulence.beam_wander_scintillation(inputs, pe2)
        a_bw = turbulence.loss_db(wander, scenario.detector.threshold_prob)
        eta_bw = turbulence.eta_from_db(a_bw)
    else:
        rc2 = pe2 = wander = a_bw = 0.0
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
        cn2_avg=ctx.cn2_avg,
        cn2_integral=ctx.cn2_integral,
        fried_r0_m=r0,
        rytov_plane=rytov_plane,
        rytov_used=rytov_used,
        aperture_d=d,
        scint_index=sigma_i2,
        a_sci_db=a_sci,
        wander_variance_m2=rc2,
        pointing_variance_m2=pe2,
        wander_scint=wander,
        a_bw_db=a_bw,
        wave=wave,
    )
    return breakdown, detail


def evaluate_context(ctx: ScenarioContext, theta_deg: float) -> PointResult:
    """Full protocol evaluation at one zenith angle."""
    scenario = ctx.scenario
    det = scenario.detector
    proto = scenario.protocol
    breakdown, detail = _transmittance(ctx, theta_deg)

    clicks = ClickModel(
        p_signal=protocols.p_signal(
            det.detector_efficiency, breakdown.eta_total, proto.mean_photon_number
        ),
        p_dark=ctx.p_dark,
        p_stray=ctx.p_stray,
    )
    coincidences = protocols.coincidence_model(
        det.detector_efficiency,
        breakdown.eta_total,
        det.dark_prob_per_window,
        ctx.p_stray,
        split=proto.entangled_split_fraction,
    )

    results: Dict[ProtocolKind, ProtocolResult] = {}
    e_bb84 = protocols.qber_prepare_measure(ProtocolKind.BB84, proto.intrinsic_error, clicks)
    f_bb84 = keyrate.f_ec(e_bb84, proto.ec_factor, proto.ec_factor_table)
    terms = keyrate.security_terms(e_bb84, clicks, proto.mean_photon_number, f_bb84)
    for kind in protocols.PREPARE_MEASURE:
        e = protocols.qber_prepare_measure(kind, proto.intrinsic_error, clicks)
        f = keyrate.f_ec(e, proto.ec_factor, proto.ec_factor_table)
        kind_terms = keyrate.security_terms(e, clicks, proto.mean_photon_number, f)
        rate = keyrate.rate_prepare_measure(kind, clicks, kind_terms, e)
        results[kind] = ProtocolResult(qber=e, rate=rate)
    for kind in protocols.ENTANGLED:
        e = protocols.qber_entangled(kind, proto.intrinsic_error, coincidences)
        f = keyrate.f_ec(e, proto.ec_factor, proto.ec_factor_table)
        rate = keyrate.rate_entangled(
            kind,
            coincidences,
            e,
            f,
            mode=proto.entangled_rate_mode,
            double_blinding=proto.double_blinding,
        )
        results[kind] = ProtocolResult(qber=e, rate=rate)

    return PointResult(
        scenario=scenario.name,
        theta_deg=theta_deg,
        breakdown=breakdown,
        turbulence=detail,
        stray_count=ctx.stray_count,
        p_stray=ctx.p_stray,
        clicks=clicks,
        coincidences=coincidences,
        security=terms,
        protocols=results,
    )


def evaluate_point(scenario: Scenario, theta_deg: float) -> PointResult:
    """Convenience wrapper building a fresh context for one evaluation."""
    return evaluate_context(build_context(scenario), theta_deg)
