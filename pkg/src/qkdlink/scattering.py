"""Mie-scattering attenuation from visibility (Kruse model) and its
altitude integral.

Attenuation at altitude h follows the empirical fog/haze form

    beta(lambda, h) = 3.91 / V(h) * (lambda / 550)**(-P(h))   [1/km]

with V(h) = 3 * V0 * h**0.26 (h and V in km, V0 the ground visibility)
and P the Kruse size-distribution exponent. The transmittance factor is
exp(-integral of beta over the altitude band), optionally scaled by
sec(zenith) for slant paths through the stratified layer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .quadrature import adaptive_simpson

_REFERENCE_WAVELENGTH_NM = 550.0


@dataclass(frozen=True)
class ScatteringModel:
    wavelength_nm: float
    ground_visibility_km: float
    slant_correct: bool = True
    floor_m: float = 1.0
    quadrature_rel_tol: float = 1e-8


def visibility(h_km: float, v0_km: float) -> float:
    """Visibility range V(h) = 3 * V0 * h**0.26 in km (0 at the ground)."""
    if h_km < 0.0:
        raise DomainError("altitude must be >= 0")
    return 3.0 * v0_km * h_km**0.26


def kruse_exponent(v_km: float) -> float:
    """Kruse size-distribution exponent P(V).

    1.6 above 50 km, 1.3 on (6, 50], 0.585 * V**(1/3) at or below 6 km
    (both boundaries take the lower branch).
    """
    if v_km <= 0.0:
        raise DomainError("visibility must be > 0")
    if v_km > 50.0:
        return 1.6
    if v_km > 6.0:
        return 1.3
    return 0.585 * v_km ** (1.0 / 3.0)


def beta(wavelength_nm: float, h_km: float, model: ScatteringModel) -> float:
    """Specific attenuation in 1/km at altitude ``h_km``.

    Diverges as h -> 0 where visibility vanishes; integrate from the
    model floor instead of 0.
    """
    v = visibility(h_km, model.ground_visibility_km)
    if v <= 0.0:
        raise DomainError("visibility is zero at the ground; start above the floor altitude")
    p = kruse_exponent(v)
    return 3.91 / v * (wavelength_nm / _REFERENCE_WAVELENGTH_NM) ** (-p)


def _branch_altitudes(model: ScatteringModel) -> tuple[float, float]:
    """Altitudes (km) where V(h) crosses the Kruse branch limits 6 and 50."""
    scale = 3.0 * model.ground_visibility_km
    return (6.0 / scale) ** (1.0 / 0.26), (50.0 / scale) ** (1.0 / 0.26)


def vertical_optical_depth(model: ScatteringModel, lo_km: float, hi_km: float) -> float:
    """Integral of beta over the altitude band [lo_km, hi_km] (zenith path).

    The band is split at the Kruse branch altitudes and each segment is
    integrated with its own branch exponent, so the (discontinuous)
    branch switch never lands inside or on the edge of a quadrature
    interval.
    """
    if hi_km <= lo_km:
        return 0.0
    h6, h50 = _branch_altitudes(model)
    scale = 3.91 / (3.0 * model.ground_visibility_km)
    ratio = model.wavelength_nm / _REFERENCE_WAVELENGTH_NM

    def cube_branch(h: float) -> float:
        v = 3.0 * model.ground_visibility_km * h**0.26
        return scale * h**-0.26 * ratio ** (-0.585 * v ** (1.0 / 3.0))

    def fixed_branch(p: float):
        factor = scale * ratio ** (-p)
        return lambda h: factor * h**-0.26

    total = 0.0
    segments = (
        (lo_km, min(hi_km, h6), cube_branch),
        (max(lo_km, h6), min(hi_km, h50), fixed_branch(1.3)),
        (max(lo_km, h50), hi_km, fixed_branch(1.6)),
    )
    for seg_lo, seg_hi, integrand in segments:
        if seg_hi > seg_lo:
            total += adaptive_simpson(
                integrand, seg_lo, seg_hi, rel_tol=model.quadrature_rel_tol
            )
    return total


def scattering_band_km(
    transmitter_altitude_m: float,
    receiver_altitude_m: float,
    atmospheric_thickness_m: float,
    floor_m: float,
) -> tuple[float, float]:
    """Altitude band (km) over which scattering acts for one link.

    The band is the overlap of [transmitter, receiver] (sorted) with
    [floor, atmospheric thickness]; an empty overlap means no
    scattering loss.
    """
    lo = max(min(transmitter_altitude_m, receiver_altitude_m), floor_m)
    hi = min(max(transmitter_altitude_m, receiver_altitude_m), atmospheric_thickness_m)
    return lo / 1000.0, hi / 1000.0


def eta_scatt(
    model: ScatteringModel,
    lo_km: float,
    hi_km: float,
    zenith_rad: float = 0.0,
) -> float:
    """Scattering transmittance exp(-tau) for one altitude band.

    With ``slant_correct`` the vertical optical depth is multiplied by
    sec(zenith); otherwise the zenith angle is ignored.
    """
    tau = vertical_optical_depth(model, lo_km, hi_km)
    if model.slant_correct:
        tau *= 1.0 / math.cos(zenith_rad)
    return math.exp(-tau)
